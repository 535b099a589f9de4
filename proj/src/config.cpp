#include "lightyear/config.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lightyear/rng.hpp"

namespace lightyear {

using nlohmann::json;

namespace {

int levenshtein(const std::string& a, const std::string& b) {
    std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("config: " + msg); }

std::string where(const std::string& section, const std::string& key) {
    return section.empty() ? "\"" + key + "\"" : "\"" + section + "." + key + "\"";
}

// Rejects keys outside the allowed set, pointing at the nearest known key.
void check_keys(const json& obj, const std::string& section, std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        const std::string& key = item.key();
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* k) { return key == k; }) != allowed.end())
            continue;
        std::string best;
        int best_d = 1 << 30;
        for (const char* k : allowed) {
            const int d = levenshtein(key, k);
            if (d < best_d) {
                best_d = d;
                best = k;
            }
        }
        std::string msg = "unknown key " + where(section, key);
        if (!best.empty()) msg += "; did you mean \"" + best + "\"?";
        fail(msg);
    }
}

double get_number(const json& obj, const std::string& section, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(where(section, key) + " must be a number");
    return v.get<double>();
}

int get_int(const json& obj, const std::string& section, const std::string& key, int fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(where(section, key) + " must be an integer");
    return v.get<int>();
}

std::uint64_t get_u64(const json& obj, const std::string& section, const std::string& key,
                      std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!(v.is_number_integer() && (v.is_number_unsigned() || v.get<std::int64_t>() >= 0)))
        fail(where(section, key) + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

bool get_bool(const json& obj, const std::string& section, const std::string& key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) fail(where(section, key) + " must be a boolean");
    return v.get<bool>();
}

template <typename T, typename Getter>
std::vector<T> get_array(const json& obj, const std::string& section, const std::string& key,
                         std::vector<T> fallback, Getter getter) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_array()) fail(where(section, key) + " must be an array");
    std::vector<T> out;
    out.reserve(v.size());
    for (const json& e : v) out.push_back(getter(e));
    return out;
}

template <typename Enum>
Enum parse_enum(const json& obj, const std::string& section, const std::string& key, Enum fallback,
                std::initializer_list<std::pair<const char*, Enum>> values) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) fail(where(section, key) + " must be a string");
    const std::string s = v.get<std::string>();
    for (const auto& [name, val] : values)
        if (s == name) return val;
    std::string valid;
    for (const auto& [name, val] : values) {
        if (!valid.empty()) valid += ", ";
        valid += name;
    }
    fail(where(section, key) + " has unknown value \"" + s + "\"; valid: " + valid);
}

const json* section_obj(const json& root, const std::string& name) {
    if (!root.contains(name)) return nullptr;
    const json& v = root.at(name);
    if (!v.is_object()) fail("\"" + name + "\" must be an object");
    return &v;
}

ExperimentConfig from_json(const json& root, const std::string& origin) {
    if (!root.is_object()) fail(origin + ": top level must be a JSON object");
    check_keys(root, "", {"master_seed", "n_clients", "rounds", "n_malfunctioning", "workers", "method",
                          "topology", "attack", "agreement", "lightyear", "baseline", "data", "model",
                          "optimizer", "sweep"});

    ExperimentConfig cfg;
    cfg.master_seed = get_u64(root, "", "master_seed", cfg.master_seed);
    cfg.n_clients = get_int(root, "", "n_clients", cfg.n_clients);
    cfg.rounds = get_int(root, "", "rounds", cfg.rounds);
    cfg.n_malfunctioning = get_int(root, "", "n_malfunctioning", cfg.n_malfunctioning);
    cfg.workers = get_int(root, "", "workers", cfg.workers);
    cfg.method = parse_enum(root, "", "method", cfg.method,
                            {std::pair<const char*, Method>{"lightyear", Method::lightyear},
                             {"fedavg", Method::fedavg},
                             {"krum", Method::krum},
                             {"balance", Method::balance},
                             {"scclip", Method::scclip}});
    cfg.topology = parse_enum(root, "", "topology", cfg.topology,
                              {std::pair<const char*, TopologyKind>{"p2p_full", TopologyKind::p2p_full},
                               {"star", TopologyKind::star}});

    if (const json* a = section_obj(root, "attack")) {
        check_keys(*a, "attack", {"kind", "ana_form", "ana_sigma", "ana_scaling_s", "sfa_alpha"});
        cfg.attack.kind = parse_enum(*a, "attack", "kind", cfg.attack.kind,
                                     {std::pair<const char*, AttackKind>{"none", AttackKind::none},
                                      {"ana", AttackKind::ana},
                                      {"sfa", AttackKind::sfa},
                                      {"random_weights", AttackKind::random_weights},
                                      {"dynamic", AttackKind::dynamic}});
        cfg.attack.ana_form = parse_enum(*a, "attack", "ana_form", cfg.attack.ana_form,
                                         {std::pair<const char*, AnaForm>{"plain", AnaForm::plain},
                                          {"scaled", AnaForm::scaled}});
        cfg.attack.ana_sigma = get_number(*a, "attack", "ana_sigma", cfg.attack.ana_sigma);
        cfg.attack.ana_scaling_s = get_number(*a, "attack", "ana_scaling_s", cfg.attack.ana_scaling_s);
        cfg.attack.sfa_alpha = get_number(*a, "attack", "sfa_alpha", cfg.attack.sfa_alpha);
    }

    if (const json* a = section_obj(root, "agreement")) {
        check_keys(*a, "agreement", {"tau", "ece_bins", "acc_mode", "entropy_normalized"});
        cfg.agreement.tau = get_number(*a, "agreement", "tau", cfg.agreement.tau);
        cfg.agreement.ece_bins = get_int(*a, "agreement", "ece_bins", cfg.agreement.ece_bins);
        cfg.agreement.acc_mode =
            parse_enum(*a, "agreement", "acc_mode", cfg.agreement.acc_mode,
                       {std::pair<const char*, AccAgreementMode>{"literal", AccAgreementMode::literal},
                        {"symmetric", AccAgreementMode::symmetric}});
        cfg.agreement.entropy_normalized =
            get_bool(*a, "agreement", "entropy_normalized", cfg.agreement.entropy_normalized);
    }

    if (const json* a = section_obj(root, "lightyear")) {
        check_keys(*a, "lightyear", {"gamma", "round_index_base"});
        cfg.lightyear.gamma = get_number(*a, "lightyear", "gamma", cfg.lightyear.gamma);
        cfg.lightyear.round_index_base =
            get_int(*a, "lightyear", "round_index_base", cfg.lightyear.round_index_base);
    }

    if (const json* a = section_obj(root, "baseline")) {
        check_keys(*a, "baseline", {"krum_f", "balance_gamma", "balance_kappa", "scclip_radius"});
        cfg.baseline.krum_f = get_int(*a, "baseline", "krum_f", cfg.baseline.krum_f);
        cfg.baseline.balance_gamma = get_number(*a, "baseline", "balance_gamma", cfg.baseline.balance_gamma);
        cfg.baseline.balance_kappa = get_number(*a, "baseline", "balance_kappa", cfg.baseline.balance_kappa);
        cfg.baseline.scclip_radius = get_number(*a, "baseline", "scclip_radius", cfg.baseline.scclip_radius);
    }

    if (const json* a = section_obj(root, "data")) {
        check_keys(*a, "data", {"strategy", "dirichlet_alpha", "group_rotation_deg", "group_shift",
                                "samples_per_client", "split_fractions", "n_classes", "n_features",
                                "class_sep"});
        cfg.data.strategy = parse_enum(
            *a, "data", "strategy", cfg.data.strategy,
            {std::pair<const char*, PartitionStrategy>{"dirichlet_label_skew",
                                                       PartitionStrategy::dirichlet_label_skew},
             {"feature_shift", PartitionStrategy::feature_shift}});
        cfg.data.dirichlet_alpha = get_number(*a, "data", "dirichlet_alpha", cfg.data.dirichlet_alpha);
        cfg.data.group_rotation_deg =
            get_number(*a, "data", "group_rotation_deg", cfg.data.group_rotation_deg);
        cfg.data.group_shift = get_number(*a, "data", "group_shift", cfg.data.group_shift);
        cfg.data.samples_per_client = get_int(*a, "data", "samples_per_client", cfg.data.samples_per_client);
        const std::vector<double> frac =
            get_array<double>(*a, "data", "split_fractions",
                              {cfg.data.split_fractions.begin(), cfg.data.split_fractions.end()},
                              [&](const json& e) {
                                  if (!e.is_number()) fail("\"data.split_fractions\" entries must be numbers");
                                  return e.get<double>();
                              });
        if (frac.size() != 3) fail("\"data.split_fractions\" must have exactly 3 entries");
        std::copy(frac.begin(), frac.end(), cfg.data.split_fractions.begin());
        cfg.data.n_classes = get_int(*a, "data", "n_classes", cfg.data.n_classes);
        cfg.data.n_features = get_int(*a, "data", "n_features", cfg.data.n_features);
        cfg.data.class_sep = get_number(*a, "data", "class_sep", cfg.data.class_sep);
    }

    if (const json* a = section_obj(root, "model")) {
        check_keys(*a, "model", {"hidden", "activation"});
        cfg.hidden_sizes = get_array<int>(*a, "model", "hidden", cfg.hidden_sizes, [&](const json& e) {
            if (!e.is_number_integer()) fail("\"model.hidden\" entries must be integers");
            return e.get<int>();
        });
        cfg.activation = parse_enum(*a, "model", "activation", cfg.activation,
                                    {std::pair<const char*, Activation>{"relu", Activation::relu},
                                     {"tanh", Activation::tanh_act}});
    }

    if (const json* a = section_obj(root, "optimizer")) {
        check_keys(*a, "optimizer",
                   {"learning_rate", "momentum", "weight_decay", "batch_size", "local_epochs"});
        cfg.optimizer.learning_rate = get_number(*a, "optimizer", "learning_rate", cfg.optimizer.learning_rate);
        cfg.optimizer.momentum = get_number(*a, "optimizer", "momentum", cfg.optimizer.momentum);
        cfg.optimizer.weight_decay = get_number(*a, "optimizer", "weight_decay", cfg.optimizer.weight_decay);
        cfg.optimizer.batch_size = get_int(*a, "optimizer", "batch_size", cfg.optimizer.batch_size);
        cfg.optimizer.local_epochs = get_int(*a, "optimizer", "local_epochs", cfg.optimizer.local_epochs);
    }

    if (const json* a = section_obj(root, "sweep")) {
        check_keys(*a, "sweep", {"max_attackers", "s_values", "attacker_counts", "gamma_values"});
        cfg.sweep.max_attackers = get_int(*a, "sweep", "max_attackers", cfg.sweep.max_attackers);
        cfg.sweep.s_values = get_array<double>(*a, "sweep", "s_values", cfg.sweep.s_values, [&](const json& e) {
            if (!e.is_number()) fail("\"sweep.s_values\" entries must be numbers");
            return e.get<double>();
        });
        cfg.sweep.attacker_counts =
            get_array<int>(*a, "sweep", "attacker_counts", cfg.sweep.attacker_counts, [&](const json& e) {
                if (!e.is_number_integer()) fail("\"sweep.attacker_counts\" entries must be integers");
                return e.get<int>();
            });
        cfg.sweep.gamma_values =
            get_array<double>(*a, "sweep", "gamma_values", cfg.sweep.gamma_values, [&](const json& e) {
                if (!e.is_number()) fail("\"sweep.gamma_values\" entries must be numbers");
                return e.get<double>();
            });
    }

    if (const char* env_seed = std::getenv("LIGHTYEAR_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env_seed, &end, 10);
        if (*env_seed == '\0' || end == env_seed || *end != '\0')
            fail("LIGHTYEAR_SEED must be a non-negative integer, got \"" + std::string(env_seed) + "\"");
        cfg.master_seed = static_cast<std::uint64_t>(v);
    }

    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
    return cfg;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(origin + ": " + e.what());
    }
    return from_json(root, origin);
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["master_seed"] = cfg.master_seed;
    j["n_clients"] = cfg.n_clients;
    j["rounds"] = cfg.rounds;
    j["n_malfunctioning"] = cfg.n_malfunctioning;
    j["workers"] = cfg.workers;
    j["method"] = to_string(cfg.method);
    j["topology"] = to_string(cfg.topology);
    j["attack"] = {{"kind", to_string(cfg.attack.kind)},
                   {"ana_form", cfg.attack.ana_form == AnaForm::plain ? "plain" : "scaled"},
                   {"ana_sigma", cfg.attack.ana_sigma},
                   {"ana_scaling_s", cfg.attack.ana_scaling_s},
                   {"sfa_alpha", cfg.attack.sfa_alpha}};
    j["agreement"] = {
        {"tau", cfg.agreement.tau},
        {"ece_bins", cfg.agreement.ece_bins},
        {"acc_mode", cfg.agreement.acc_mode == AccAgreementMode::literal ? "literal" : "symmetric"},
        {"entropy_normalized", cfg.agreement.entropy_normalized}};
    j["lightyear"] = {{"gamma", cfg.lightyear.gamma}, {"round_index_base", cfg.lightyear.round_index_base}};
    j["baseline"] = {{"krum_f", cfg.baseline.krum_f},
                     {"balance_gamma", cfg.baseline.balance_gamma},
                     {"balance_kappa", cfg.baseline.balance_kappa},
                     {"scclip_radius", cfg.baseline.scclip_radius}};
    j["data"] = {{"strategy", to_string(cfg.data.strategy)},
                 {"dirichlet_alpha", cfg.data.dirichlet_alpha},
                 {"group_rotation_deg", cfg.data.group_rotation_deg},
                 {"group_shift", cfg.data.group_shift},
                 {"samples_per_client", cfg.data.samples_per_client},
                 {"split_fractions", cfg.data.split_fractions},
                 {"n_classes", cfg.data.n_classes},
                 {"n_features", cfg.data.n_features},
                 {"class_sep", cfg.data.class_sep}};
    j["model"] = {{"hidden", cfg.hidden_sizes},
                  {"activation", cfg.activation == Activation::relu ? "relu" : "tanh"}};
    j["optimizer"] = {{"learning_rate", cfg.optimizer.learning_rate},
                      {"momentum", cfg.optimizer.momentum},
                      {"weight_decay", cfg.optimizer.weight_decay},
                      {"batch_size", cfg.optimizer.batch_size},
                      {"local_epochs", cfg.optimizer.local_epochs}};
    j["sweep"] = {{"max_attackers", cfg.sweep.max_attackers},
                  {"s_values", cfg.sweep.s_values},
                  {"attacker_counts", cfg.sweep.attacker_counts},
                  {"gamma_values", cfg.sweep.gamma_values}};
    return j.dump(2);
}

std::string run_id(const ExperimentConfig& cfg) {
    // Execution-only knobs stay out of the identity so a run keeps its id
    // (and byte-identical outputs) across worker counts.
    json j = json::parse(config_to_json(cfg));
    j.erase("workers");
    const std::uint64_t h = detail::fnv1a64(j.dump());
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%016llx-s%llu", static_cast<unsigned long long>(h),
                  static_cast<unsigned long long>(cfg.master_seed));
    return buf;
}

}  // namespace lightyear
