#include "noisespec/cli/config.hpp"

#include <charconv>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <thread>

#include "noisespec/error.hpp"
#include "noisespec/io.hpp"

namespace noisespec::cli {
namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v)
{
    T out{};
    if constexpr (std::is_floating_point_v<T>) {
        try {
            return static_cast<T>(io::parse_double(v));
        } catch (const std::exception&) {
            throw UsageError(key + ": expected a number, got '" + v + "'");
        }
    } else {
        const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || p != v.data() + v.size())
            throw UsageError(key + ": expected an integer, got '" + v + "'");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw UsageError(key + ": expected a boolean, got '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

template <class T>
Setter number(T RunConfig::*field)
{
    return [field](RunConfig& c, const std::string& k, const std::string& v) { c.*field = parse_number<T>(k, v); };
}

template <class T>
Setter physics_number(T dataset::Physics::*field)
{
    return [field](RunConfig& c, const std::string& k, const std::string& v) {
        c.physics.*field = parse_number<T>(k, v);
    };
}

Setter text(std::string RunConfig::*field)
{
    return [field](RunConfig& c, const std::string&, const std::string& v) { c.*field = v; };
}

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table{
        {"dataset.task", [](RunConfig& c, const std::string&, const std::string& v) {
             c.task = dataset::to_string(dataset::parse_task(v));
         }},
        {"dataset.mode", [](RunConfig& c, const std::string&, const std::string& v) {
             c.mode = dataset::to_string(dataset::parse_mode(v));
         }},
        {"dataset.n", number(&RunConfig::n)},
        {"dataset.seed", [](RunConfig& c, const std::string& k, const std::string& v) {
             c.seed = parse_number<std::uint64_t>(k, v);
         }},

        {"physics.dephasing_omega_c", physics_number(&dataset::Physics::dephasing_omega_c)},
        {"physics.dephasing_omega0", physics_number(&dataset::Physics::dephasing_omega0)},
        {"physics.dephasing_t_max", physics_number(&dataset::Physics::dephasing_t_max)},
        {"physics.s_class_eta", physics_number(&dataset::Physics::s_class_eta)},
        {"physics.eta_task_s", physics_number(&dataset::Physics::eta_task_s)},
        {"physics.ohmic_band", physics_number(&dataset::Physics::ohmic_band)},
        {"physics.gamma", physics_number(&dataset::Physics::sb_gamma)},
        {"physics.sb_omega_c", physics_number(&dataset::Physics::sb_omega_c)},
        {"physics.sb_omega0", physics_number(&dataset::Physics::sb_omega0)},
        {"physics.kT_over_delta", physics_number(&dataset::Physics::kT_over_delta)},
        {"physics.alpha_min", physics_number(&dataset::Physics::alpha_min)},
        {"physics.alpha_max", physics_number(&dataset::Physics::alpha_max)},
        {"physics.reference_alpha", physics_number(&dataset::Physics::reference_alpha)},
        {"physics.tau_max", physics_number(&dataset::Physics::tau_max)},
        {"physics.heom_depth", physics_number(&dataset::Physics::heom_depth)},
        {"physics.heom_min_matsubara", physics_number(&dataset::Physics::heom_min_matsubara)},
        {"physics.heom_matsubara_margin", physics_number(&dataset::Physics::heom_matsubara_margin)},

        {"model.kind", [](RunConfig& c, const std::string& k, const std::string& v) {
             if (v != "forest" && v != "svr" && v != "ffnn")
                 throw UsageError(k + ": expected forest, svr or ffnn, got '" + v + "'");
             c.kind = v;
         }},
        {"model.target", text(&RunConfig::target)},
        {"model.trees", number(&RunConfig::trees)},
        {"model.max_features", number(&RunConfig::max_features)},
        {"model.max_depth", number(&RunConfig::max_depth)},
        {"model.min_samples_split", number(&RunConfig::min_samples_split)},
        {"model.kernel", [](RunConfig& c, const std::string& k, const std::string& v) {
             if (v != "linear" && v != "poly" && v != "rbf")
                 throw UsageError(k + ": expected linear, poly or rbf, got '" + v + "'");
             c.kernel = v;
         }},
        {"model.C", number(&RunConfig::C)},
        {"model.epsilon", number(&RunConfig::epsilon)},
        {"model.svr_gamma", number(&RunConfig::svr_gamma)},
        {"model.degree", number(&RunConfig::degree)},
        {"model.coef0", number(&RunConfig::coef0)},
        {"model.tol", number(&RunConfig::tol)},
        {"model.max_iter", number(&RunConfig::max_iter)},
        {"model.learning_rate", number(&RunConfig::learning_rate)},
        {"model.batch_size", number(&RunConfig::batch_size)},
        {"model.epochs", number(&RunConfig::epochs)},

        {"train.workers", number(&RunConfig::workers)},
        {"train.split", [](RunConfig& c, const std::string& k, const std::string& v) {
             if (v != "train" && v != "val" && v != "test")
                 throw UsageError(k + ": expected train, val or test, got '" + v + "'");
             c.split = v;
         }},
        {"train.svg", [](RunConfig& c, const std::string& k, const std::string& v) { c.svg = parse_bool(k, v); }},

        {"paths.dataset", text(&RunConfig::dataset_dir)},
        {"paths.model", text(&RunConfig::model_path)},
        {"paths.out", text(&RunConfig::out_dir)},
        {"paths.features", text(&RunConfig::features_path)},
        {"paths.predictions", text(&RunConfig::predictions_path)},
    };
    return table;
}

} // namespace

std::map<std::string, std::string> parse_ini(const std::string& text)
{
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw UsageError("config line " + std::to_string(lineno) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || section.empty())
            throw UsageError("config line " + std::to_string(lineno) + ": expected key = value inside a section");
        out[section + "." + trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

void apply(RunConfig& cfg, const std::string& key, const std::string& value)
{
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end()) throw UsageError("unknown config key '" + key + "'");
    it->second(cfg, key, value);
}

std::uint64_t resolve_seed(const RunConfig& cfg)
{
    if (cfg.seed) return *cfg.seed;
    if (const char* env = std::getenv("NOISESPEC_SEED"); env && *env) {
        std::uint64_t s = 0;
        const std::string v(env);
        const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
        if (ec != std::errc() || p != v.data() + v.size())
            throw UsageError("NOISESPEC_SEED: expected an unsigned integer, got '" + v + "'");
        return s;
    }
    return 0;
}

unsigned resolve_workers(const RunConfig& cfg)
{
    if (cfg.workers > 0) return cfg.workers;
    return std::max(1u, std::thread::hardware_concurrency());
}

nlohmann::json canonical(const RunConfig& c)
{
    const auto& p = c.physics;
    return {
        {"dataset", {{"task", c.task}, {"mode", c.mode}, {"n", c.n}, {"seed", resolve_seed(c)}}},
        {"physics",
         {{"dephasing_omega_c", p.dephasing_omega_c},
          {"dephasing_omega0", p.dephasing_omega0},
          {"dephasing_t_max", p.dephasing_t_max},
          {"s_class_eta", p.s_class_eta},
          {"eta_task_s", p.eta_task_s},
          {"ohmic_band", p.ohmic_band},
          {"gamma", p.sb_gamma},
          {"sb_omega_c", p.sb_omega_c},
          {"sb_omega0", p.sb_omega0},
          {"kT_over_delta", p.kT_over_delta},
          {"alpha_min", p.alpha_min},
          {"alpha_max", p.alpha_max},
          {"reference_alpha", p.reference_alpha},
          {"tau_max", p.tau_max},
          {"heom_depth", p.heom_depth},
          {"heom_min_matsubara", p.heom_min_matsubara},
          {"heom_matsubara_margin", p.heom_matsubara_margin}}},
        {"model",
         {{"kind", c.kind},
          {"target", c.target},
          {"trees", c.trees},
          {"max_features", c.max_features},
          {"max_depth", c.max_depth},
          {"min_samples_split", c.min_samples_split},
          {"kernel", c.kernel},
          {"C", c.C},
          {"epsilon", c.epsilon},
          {"svr_gamma", c.svr_gamma},
          {"degree", c.degree},
          {"coef0", c.coef0},
          {"tol", c.tol},
          {"max_iter", c.max_iter},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs}}},
        {"train", {{"split", c.split}}},
    };
}

std::string config_hash(const RunConfig& cfg) { return io::hex_digest(canonical(cfg).dump()); }

} // namespace noisespec::cli
