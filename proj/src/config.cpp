#include "fbmq/config.hpp"

#include <json.hpp>

#include <set>

namespace fbmq {

namespace {

using nlohmann::json;

// nlohmann's DOM keeps the last duplicate silently; a SAX scan over the flat
// document catches duplicates before DOM parsing.
class DuplicateKeyCheck : public nlohmann::json_sax<json> {
  public:
    bool key(string_t& k) override {
        if (depth_ == 1 && !seen_.insert(k).second)
            throw config_error("config: duplicate key '" + k + "'");
        return true;
    }
    bool start_object(std::size_t) override {
        ++depth_;
        return true;
    }
    bool end_object() override {
        --depth_;
        return true;
    }
    bool null() override { return true; }
    bool boolean(bool) override { return true; }
    bool number_integer(number_integer_t) override { return true; }
    bool number_unsigned(number_unsigned_t) override { return true; }
    bool number_float(number_float_t, const string_t&) override { return true; }
    bool string(string_t&) override { return true; }
    bool binary(binary_t&) override { return true; }
    bool start_array(std::size_t) override { return true; }
    bool end_array() override { return true; }
    bool parse_error(std::size_t pos, const std::string&,
                     const nlohmann::detail::exception& ex) override {
        throw config_error("config: syntax error at byte " + std::to_string(pos) + ": " +
                           ex.what());
    }

  private:
    int depth_ = 0;
    std::set<std::string> seen_;
};

double require_number(const json& doc, const char* key) {
    const auto it = doc.find(key);
    if (it == doc.end()) throw config_error(std::string("config: missing key '") + key + "'");
    if (!it->is_number())
        throw config_error(std::string("config: key '") + key + "' must be a number");
    return it->get<double>();
}

double optional_number(const json& doc, const char* key, double fallback) {
    const auto it = doc.find(key);
    if (it == doc.end()) return fallback;
    if (!it->is_number())
        throw config_error(std::string("config: key '") + key + "' must be a number");
    return it->get<double>();
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    DuplicateKeyCheck sax;
    json::sax_parse(text, &sax);

    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& ex) {
        throw config_error(std::string("config: syntax error: ") + ex.what());
    }
    if (!doc.is_object()) throw config_error("config: document must be a flat JSON object");

    static const std::set<std::string> known = {"H",       "theta",       "lambda", "c",
                                                "b_grid",  "n_target",    "dt_rule",
                                                "window_rule", "sampler", "r",      "seed"};
    for (const auto& item : doc.items())
        if (known.find(item.key()) == known.end())
            throw config_error("config: unknown key '" + item.key() + "'");

    const double h_value = require_number(doc, "H");
    if (!(h_value > 0.0 && h_value < 1.0))
        throw config_error("config: H violates 0 < H < 1");
    const double theta = require_number(doc, "theta");
    if (!(theta > 0.0)) throw config_error("config: theta violates theta > 0");
    const double lambda = require_number(doc, "lambda");
    const double c = require_number(doc, "c");
    if (!(c > lambda)) throw config_error("config: requires c > lambda (mu > 0)");

    const auto b_it = doc.find("b_grid");
    if (b_it == doc.end() || !b_it->is_array() || b_it->empty())
        throw config_error("config: b_grid must be a nonempty ascending array of levels");
    std::vector<double> b_grid;
    for (const auto& v : *b_it) {
        if (!v.is_number()) throw config_error("config: b_grid entries must be numbers");
        b_grid.push_back(v.get<double>());
        if (!(b_grid.back() > 0.0)) throw config_error("config: b_grid violates b > 0");
        if (b_grid.size() > 1 && !(b_grid.back() > b_grid[b_grid.size() - 2]))
            throw config_error("config: b_grid must be strictly ascending");
    }

    const double n_target = require_number(doc, "n_target");
    if (!(n_target >= 100.0) || n_target != std::floor(n_target))
        throw config_error("config: n_target violates integer n_target >= 100");

    const double dt_rule = optional_number(doc, "dt_rule", 0.05);
    if (!(dt_rule > 0.0 && dt_rule <= 0.1))
        throw config_error("config: dt_rule violates 0 < dt_rule <= 0.1");
    const double window_rule = optional_number(doc, "window_rule", 4.0);
    if (!(window_rule > 0.0)) throw config_error("config: window_rule violates window_rule > 0");
    const double r = optional_number(doc, "r", 0.05);
    if (!(r > 0.0)) throw config_error("config: r violates r > 0");

    SamplerKind sampler = SamplerKind::rejection;
    if (const auto it = doc.find("sampler"); it != doc.end()) {
        if (!it->is_string())
            throw config_error("config: sampler must be \"rejection\" or \"endpoint_conditioned\"");
        const std::string s = it->get<std::string>();
        if (s == "rejection")
            sampler = SamplerKind::rejection;
        else if (s == "endpoint_conditioned")
            sampler = SamplerKind::endpoint_conditioned;
        else
            throw config_error("config: unknown sampler '" + s + "'");
    }

    const double seed = require_number(doc, "seed");
    if (!(seed >= 0.0) || seed != std::floor(seed))
        throw config_error("config: seed must be a nonnegative integer");

    RunConfig rc{ExperimentConfig{ModelParams(HurstParam(h_value), theta, lambda, c),
                                  std::move(b_grid),
                                  static_cast<long>(n_target),
                                  dt_rule,
                                  window_rule,
                                  sampler,
                                  RngSeed{static_cast<std::uint64_t>(seed), 0},
                                  r}};
    rc.experiment.validate();
    return rc;
}

std::string canonical_config(const RunConfig& config) {
    const ExperimentConfig& e = config.experiment;
    json doc;
    doc["H"] = e.params.hurst.value();
    doc["theta"] = e.params.theta;
    doc["lambda"] = e.params.lambda_rate;
    doc["c"] = e.params.service_rate;
    doc["b_grid"] = e.b_grid;
    doc["n_target"] = e.n_target;
    doc["dt_rule"] = e.dt_rule;
    doc["window_rule"] = e.window_rule;
    doc["sampler"] =
        e.sampler == SamplerKind::rejection ? "rejection" : "endpoint_conditioned";
    doc["r"] = e.r;
    doc["seed"] = e.seed.seed;
    return doc.dump();  // object keys are stored sorted
}

std::string config_hash(const RunConfig& config) {
    const std::string text = canonical_config(config);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace fbmq
