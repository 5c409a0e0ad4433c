#include "fbmq/csvio.hpp"

#include <json.hpp>

#include <fstream>

namespace fbmq {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string table_to_csv(const Table& table) {
    std::string out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out += ',';
        out += table.header[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_double(row[i]);
        }
        out += '\n';
    }
    return out;
}

std::string table_to_json(const Table& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json obj;
        for (std::size_t i = 0; i < row.size() && i < table.header.size(); ++i)
            obj[table.header[i]] = row[i];
        rows.push_back(obj);
    }
    return rows.dump(2) + "\n";
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + p.string());
    os << content;
    os.flush();
    if (!os) throw std::runtime_error("write failed: " + p.string());
}

}  // namespace

OutputWriter::OutputWriter(std::filesystem::path out_dir, const RunConfig& config,
                           std::string toolkit_version)
    : dir_(std::move(out_dir)),
      hash_(config_hash(config)),
      seed_(config.experiment.seed.seed),
      version_(std::move(toolkit_version)),
      format_(config.format) {
    std::filesystem::create_directories(dir_);
}

void OutputWriter::record(const std::filesystem::path& p) { written_.push_back(p); }

void OutputWriter::write_table(const std::string& name, const Table& table,
                               const Sidecar& sidecar) {
    const std::string ext = format_ == OutputFormat::csv ? ".csv" : ".json";
    const auto path = dir_ / (name + ext);
    write_file(path, format_ == OutputFormat::csv ? table_to_csv(table)
                                                  : table_to_json(table));
    record(path);
    artifacts_.push_back(name + ext);

    nlohmann::json side;
    side["config_hash"] = hash_;
    side["seed"] = seed_;
    side["n_accepted"] = sidecar.n_accepted;
    side["n_proposed"] = sidecar.n_proposed;
    side["wall_time"] = sidecar.wall_time;
    const auto side_path = dir_ / (name + ".meta.json");
    write_file(side_path, side.dump(2) + "\n");
    record(side_path);
    artifacts_.push_back(name + ".meta.json");
}

void OutputWriter::write_text(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    write_file(path, content);
    record(path);
    artifacts_.push_back(name);
}

void OutputWriter::write_json(const std::string& name, const std::string& json_text) {
    write_text(name, json_text);
}

void OutputWriter::finalize() {
    nlohmann::json manifest;
    manifest["config_hash"] = hash_;
    manifest["toolkit_version"] = version_;
    manifest["seed"] = seed_;
    manifest["artifacts"] = artifacts_;
    write_file(dir_ / "manifest.json", manifest.dump(2) + "\n");
    finalized_ = true;
}

void OutputWriter::abort() {
    std::error_code ec;
    for (const auto& p : written_) std::filesystem::remove(p, ec);
    std::filesystem::remove(dir_ / "manifest.json", ec);
}

}  // namespace fbmq
