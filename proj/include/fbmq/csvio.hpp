#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fbmq/config.hpp"

namespace fbmq {

/// A plot-ready table: fixed header, numeric cells written with 17
/// significant digits so values round-trip exactly.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

std::string format_double(double v);

std::string table_to_csv(const Table& table);
std::string table_to_json(const Table& table);

/// Per-artifact sidecar content.
struct Sidecar {
    std::string config_hash;
    std::uint64_t seed = 0;
    long n_accepted = 0;
    long n_proposed = 0;
    double wall_time = 0.0;
};

/// Writes artifacts atomically into a run directory and the manifest last,
/// so manifest presence signals completion. On failure every partial output
/// of this run is removed.
class OutputWriter {
  public:
    OutputWriter(std::filesystem::path out_dir, const RunConfig& config,
                 std::string toolkit_version);

    /// Writes the table in the configured format plus its JSON sidecar.
    void write_table(const std::string& name, const Table& table, const Sidecar& sidecar);

    void write_text(const std::string& name, const std::string& content);
    void write_json(const std::string& name, const std::string& json_text);

    /// Writes the manifest; call last.
    void finalize();

    /// Removes everything written so far (failure path).
    void abort();

    const std::filesystem::path& directory() const { return dir_; }

  private:
    void record(const std::filesystem::path& p);

    std::filesystem::path dir_;
    std::string hash_;
    std::uint64_t seed_;
    std::string version_;
    OutputFormat format_ = OutputFormat::csv;
    std::vector<std::string> artifacts_;
    std::vector<std::filesystem::path> written_;
    bool finalized_ = false;
};

}  // namespace fbmq
