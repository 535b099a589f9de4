#include "lightyear/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lightyear/parallel.hpp"
#include "lightyear/rng.hpp"

namespace lightyear {

namespace {

// Seed stream purposes. Each consumer owns a tag so that changing one phase
// (say, the attack) can never perturb another phase's draws.
constexpr const char* kSeedTask = "task";
constexpr const char* kSeedPartition = "partition";
constexpr const char* kSeedSplit = "split";
constexpr const char* kSeedInit = "init";
constexpr const char* kSeedTrain = "train";
constexpr const char* kSeedAttack = "attack";
constexpr const char* kSeedAttackers = "attacker_order";

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void DataConfig::validate() const {
    if (!(dirichlet_alpha > 0.0)) throw std::invalid_argument("dirichlet_alpha must satisfy dirichlet_alpha > 0");
    if (samples_per_client < 10)
        throw std::invalid_argument("samples_per_client must satisfy samples_per_client >= 10");
    if (n_classes < 2) throw std::invalid_argument("n_classes must satisfy n_classes >= 2");
    if (n_features < 2) throw std::invalid_argument("n_features must satisfy n_features >= 2");
    if (!(class_sep >= 0.0)) throw std::invalid_argument("class_sep must satisfy class_sep >= 0");
    double fsum = 0.0;
    for (const double f : split_fractions) {
        if (!(f > 0.0)) throw std::invalid_argument("split_fractions must be positive");
        fsum += f;
    }
    if (std::abs(fsum - 1.0) > 1e-9) throw std::invalid_argument("split_fractions must sum to 1");
}

void SweepConfig::validate() const {
    if (max_attackers < 0) throw std::invalid_argument("max_attackers must satisfy max_attackers >= 0");
    for (const double s : s_values)
        if (!(s >= 0.0)) throw std::invalid_argument("s_values entries must satisfy s >= 0");
    for (const int k : attacker_counts)
        if (k < 0) throw std::invalid_argument("attacker_counts entries must satisfy k >= 0");
    for (const double g : gamma_values)
        if (!(g > 0.0 && g <= 1.0)) throw std::invalid_argument("gamma_values entries must satisfy gamma in (0,1]");
}

ModelSpec ExperimentConfig::model_spec() const {
    ModelSpec spec;
    spec.layer_sizes.reserve(hidden_sizes.size() + 2);
    spec.layer_sizes.push_back(data.n_features);
    spec.layer_sizes.insert(spec.layer_sizes.end(), hidden_sizes.begin(), hidden_sizes.end());
    spec.layer_sizes.push_back(data.n_classes);
    spec.activation = activation;
    return spec;
}

void ExperimentConfig::validate() const {
    if (n_clients < 2) throw std::invalid_argument("n_clients must satisfy n_clients >= 2");
    if (rounds < 1) throw std::invalid_argument("rounds must satisfy rounds >= 1");
    if (n_malfunctioning < 0 || n_malfunctioning > n_clients)
        throw std::invalid_argument("n_malfunctioning must satisfy 0 <= n_malfunctioning <= n_clients");
    if (workers < 1) throw std::invalid_argument("workers must satisfy workers >= 1");
    for (const int h : hidden_sizes)
        if (h < 1) throw std::invalid_argument("hidden sizes must satisfy size >= 1");
    if (method == Method::krum && n_clients < baseline.krum_f + 3)
        throw std::invalid_argument("krum needs n_clients >= krum_f + 3");
    if (method == Method::lightyear && topology == TopologyKind::star && !(agreement.tau <= -1.0))
        throw std::invalid_argument(
            "star topology with the agreement method requires tau <= -1: the server has no "
            "validation data to score peers, so only accept-all is meaningful");
    attack.validate();
    agreement.validate();
    lightyear.validate();
    baseline.validate();
    data.validate();
    sweep.validate();
    optimizer.validate();
    model_spec().validate();
}

Federation::Federation(const ExperimentConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    const int n = cfg_.n_clients;
    const ModelSpec spec = cfg_.model_spec();

    const LabeledDataset full =
        gen_gaussian_task(cfg_.data.n_classes, cfg_.data.n_features, cfg_.data.samples_per_client * n,
                          cfg_.data.class_sep, derive_seed(cfg_.master_seed, kSeedTask));

    std::vector<LabeledDataset> shards;
    switch (cfg_.data.strategy) {
        case PartitionStrategy::dirichlet_label_skew:
            shards = partition_dirichlet(full, n, cfg_.data.dirichlet_alpha,
                                         derive_seed(cfg_.master_seed, kSeedPartition));
            break;
        case PartitionStrategy::feature_shift:
            shards = partition_feature_shift(full, n, cfg_.data.group_rotation_deg, cfg_.data.group_shift,
                                             derive_seed(cfg_.master_seed, kSeedPartition));
            break;
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng attacker_rng = derive_stream(cfg_.master_seed, kSeedAttackers);
    attacker_rng.shuffle(order);
    for (int k = 0; k < cfg_.n_malfunctioning; ++k) malfunctioning_.insert(order[static_cast<std::size_t>(k)]);

    clients_.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        ClientState c;
        c.id = i;
        ThreeWaySplit split = split_three_way(shards[static_cast<std::size_t>(i)], cfg_.data.split_fractions,
                                              derive_seed(cfg_.master_seed, kSeedSplit, static_cast<std::uint64_t>(i)));
        c.train = std::move(split.train);
        c.val = std::move(split.val);
        c.test = std::move(split.test);
        c.model = init_params(spec, derive_seed(cfg_.master_seed, kSeedInit, static_cast<std::uint64_t>(i)));
        c.opt = make_optimizer(spec, cfg_.optimizer);
        if (malfunctioning_.count(i)) c.malfunction = cfg_.attack;
        c.scclip_radius = cfg_.baseline.scclip_radius;
        clients_.push_back(std::move(c));
    }

    if (cfg_.topology == TopologyKind::star) {
        ClientState server;
        server.id = n;
        server.model = init_params(spec, derive_seed(cfg_.master_seed, kSeedInit, static_cast<std::uint64_t>(n)));
        server.opt = make_optimizer(spec, cfg_.optimizer);
        server.scclip_radius = cfg_.baseline.scclip_radius;
        server_ = std::move(server);
    }
}

const ParamVector& Federation::server_model() const {
    if (!server_) throw std::logic_error("server_model: not a star topology run");
    return server_->model;
}

ParamVector Federation::aggregate_for_client(int i, const ParamVector& own_trained,
                                             const std::vector<ParamVector>& broadcasts, int round_t,
                                             ClientRound& log) {
    const int n = cfg_.n_clients;
    ClientState& me = clients_[static_cast<std::size_t>(i)];

    switch (cfg_.method) {
        case Method::lightyear: {
            std::vector<AgreementReport> reports;
            reports.reserve(static_cast<std::size_t>(n) - 1);
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                reports.push_back(agreement_score(own_trained, broadcasts[static_cast<std::size_t>(j)], me.val,
                                                  cfg_.agreement, j));
            }
            const std::set<int> selected = select_aggregation_set(reports, cfg_.agreement.tau);
            log.selected = selected;
            for (const AgreementReport& r : reports) log.composite_scores[r.peer_id] = r.composite;

            std::vector<ParamVector> chosen;
            chosen.reserve(selected.size());
            for (const int j : selected) chosen.push_back(broadcasts[static_cast<std::size_t>(j)]);
            return lightyear_aggregate(own_trained, chosen, round_t, cfg_.lightyear);
        }
        case Method::fedavg:
        case Method::krum: {
            // The receiver contributes its own honest update in its slot.
            std::vector<ParamVector> candidates;
            candidates.reserve(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j)
                candidates.push_back(j == i ? own_trained : broadcasts[static_cast<std::size_t>(j)]);
            return cfg_.method == Method::fedavg ? fedavg(candidates)
                                                 : krum(candidates, cfg_.baseline.krum_f);
        }
        case Method::balance: {
            std::vector<ParamVector> received;
            received.reserve(static_cast<std::size_t>(n) - 1);
            for (int j = 0; j < n; ++j)
                if (j != i) received.push_back(broadcasts[static_cast<std::size_t>(j)]);
            return balance(own_trained, received, round_t, cfg_.rounds, cfg_.baseline);
        }
        case Method::scclip: {
            std::vector<ParamVector> received;
            std::vector<double> dists;
            received.reserve(static_cast<std::size_t>(n) - 1);
            for (int j = 0; j < n; ++j)
                if (j != i) {
                    received.push_back(broadcasts[static_cast<std::size_t>(j)]);
                    dists.push_back(l2_distance(broadcasts[static_cast<std::size_t>(j)], own_trained));
                }
            // Radius 0 means uncalibrated: freeze this receiver's radius at
            // the first round's median update distance.
            if (me.scclip_radius <= 0.0) me.scclip_radius = std::max(median_of(dists), 1e-12);
            return scclip(own_trained, received, me.scclip_radius);
        }
    }
    throw std::logic_error("unhandled aggregation method");
}

RoundLog Federation::run_round(int round_t) {
    if (round_t != next_round_)
        throw std::invalid_argument("run_round: rounds must be consecutive starting at 1");
    ++next_round_;

    const int n = cfg_.n_clients;
    std::vector<ParamVector> trained(static_cast<std::size_t>(n));
    std::vector<OptimizerState> trained_opt(static_cast<std::size_t>(n));
    std::vector<ParamVector> broadcasts(static_cast<std::size_t>(n));
    std::vector<AttackKind> kinds(static_cast<std::size_t>(n), AttackKind::none);

    parallel_for(n, cfg_.workers, [&](int i) {
        ClientState& c = clients_[static_cast<std::size_t>(i)];
        TrainResult tr = train_local(c.model, c.opt, c.train,
                                     derive_seed(cfg_.master_seed, kSeedTrain, static_cast<std::uint64_t>(i),
                                                 static_cast<std::uint64_t>(round_t)));
        trained[static_cast<std::size_t>(i)] = std::move(tr.params);
        trained_opt[static_cast<std::size_t>(i)] = std::move(tr.opt);
    });

    // Corruption only touches the broadcast copy; the honest state the
    // client keeps training from is written back below.
    for (int i = 0; i < n; ++i) {
        const ClientState& c = clients_[static_cast<std::size_t>(i)];
        if (c.malfunction.kind == AttackKind::none) {
            broadcasts[static_cast<std::size_t>(i)] = trained[static_cast<std::size_t>(i)];
        } else {
            Rng rng = derive_stream(cfg_.master_seed, kSeedAttack, static_cast<std::uint64_t>(i),
                                    static_cast<std::uint64_t>(round_t));
            AttackResult res = apply_attack(trained[static_cast<std::size_t>(i)], c.malfunction, rng);
            broadcasts[static_cast<std::size_t>(i)] = std::move(res.params);
            kinds[static_cast<std::size_t>(i)] = res.applied;
        }
    }

    last_broadcasts_ = broadcasts;

    RoundLog log;
    log.round = round_t;
    log.clients.resize(static_cast<std::size_t>(n));

    if (cfg_.topology == TopologyKind::p2p_full) {
        std::vector<ParamVector> next(static_cast<std::size_t>(n));
        parallel_for(n, cfg_.workers, [&](int i) {
            next[static_cast<std::size_t>(i)] = aggregate_for_client(
                i, trained[static_cast<std::size_t>(i)], broadcasts, round_t, log.clients[static_cast<std::size_t>(i)]);
        });
        for (int i = 0; i < n; ++i) {
            clients_[static_cast<std::size_t>(i)].model = std::move(next[static_cast<std::size_t>(i)]);
            clients_[static_cast<std::size_t>(i)].opt = std::move(trained_opt[static_cast<std::size_t>(i)]);
        }
    } else {
        ClientState& server = *server_;
        ParamVector global;
        switch (cfg_.method) {
            case Method::fedavg: global = fedavg(broadcasts); break;
            case Method::krum: global = krum(broadcasts, cfg_.baseline.krum_f); break;
            case Method::balance:
                global = balance(server.model, broadcasts, round_t, cfg_.rounds, cfg_.baseline);
                break;
            case Method::scclip: {
                std::vector<double> dists;
                dists.reserve(static_cast<std::size_t>(n));
                for (const ParamVector& b : broadcasts) dists.push_back(l2_distance(b, server.model));
                if (server.scclip_radius <= 0.0) server.scclip_radius = std::max(median_of(dists), 1e-12);
                global = scclip(server.model, broadcasts, server.scclip_radius);
                break;
            }
            case Method::lightyear:
                // Validation guarantees accept-all here; the server applies
                // the decayed step over every broadcast.
                global = lightyear_aggregate(server.model, broadcasts, round_t, cfg_.lightyear);
                break;
        }
        server.model = global;
        for (int i = 0; i < n; ++i) {
            clients_[static_cast<std::size_t>(i)].model = global;
            clients_[static_cast<std::size_t>(i)].opt = std::move(trained_opt[static_cast<std::size_t>(i)]);
        }
    }

    parallel_for(n, cfg_.workers, [&](int i) {
        const ClientState& c = clients_[static_cast<std::size_t>(i)];
        ClientRound& cr = log.clients[static_cast<std::size_t>(i)];
        cr.client_id = i;
        cr.attack_kind = kinds[static_cast<std::size_t>(i)];
        cr.val_accuracy = accuracy(c.model, c.val);
        const EvalReport ev = evaluate(c.model, c.test, cfg_.agreement.ece_bins);
        cr.test_accuracy = ev.accuracy;
        cr.ece = ev.ece;
    });
    return log;
}

std::vector<RoundLog> Federation::run_all() {
    std::vector<RoundLog> logs;
    logs.reserve(static_cast<std::size_t>(cfg_.rounds));
    for (int t = 1; t <= cfg_.rounds; ++t) logs.push_back(run_round(t));
    return logs;
}

std::vector<RoundLog> run_experiment(const ExperimentConfig& cfg) {
    Federation fed(cfg);
    return fed.run_all();
}

double mean_test_accuracy(const RoundLog& log) {
    double s = 0.0;
    for (const ClientRound& c : log.clients) s += c.test_accuracy;
    return s / static_cast<double>(log.clients.size());
}

double mean_val_accuracy(const RoundLog& log) {
    double s = 0.0;
    for (const ClientRound& c : log.clients) s += c.val_accuracy;
    return s / static_cast<double>(log.clients.size());
}

std::vector<AttackerSweepCell> attacker_sweep(const ExperimentConfig& base, int max_attackers) {
    if (max_attackers < 0 || max_attackers > base.n_clients)
        throw std::invalid_argument("attacker_sweep: max_attackers must satisfy 0 <= max_attackers <= n_clients");
    std::vector<AttackerSweepCell> cells;
    cells.reserve(static_cast<std::size_t>(max_attackers) + 1);
    for (int k = 0; k <= max_attackers; ++k) {
        ExperimentConfig cfg = base;
        cfg.n_malfunctioning = k;
        Federation fed(cfg);
        AttackerSweepCell cell;
        cell.n_malfunctioning = k;
        cell.attacker_ids = fed.malfunctioning();
        cell.logs = fed.run_all();
        cell.final_mean_test_accuracy = mean_test_accuracy(cell.logs.back());
        cells.push_back(std::move(cell));
    }
    return cells;
}

std::vector<SensitivityCell> sensitivity_sweep(const ExperimentConfig& base,
                                               const std::vector<double>& s_values,
                                               const std::vector<int>& attacker_counts) {
    if (base.attack.kind != AttackKind::ana || base.attack.ana_form != AnaForm::scaled)
        throw std::invalid_argument("sensitivity_sweep: base attack must be ana with the scaled form");
    if (s_values.empty() || attacker_counts.empty())
        throw std::invalid_argument("sensitivity_sweep: empty grid");
    std::vector<SensitivityCell> cells;
    for (const double s : s_values) {
        if (!(s >= 0.0)) throw std::invalid_argument("sensitivity_sweep: s must satisfy s >= 0");
        for (const int k : attacker_counts) {
            if (k < 0 || k > base.n_clients)
                throw std::invalid_argument("sensitivity_sweep: k must satisfy 0 <= k <= n_clients");
            ExperimentConfig cfg = base;
            cfg.attack.ana_scaling_s = s;
            cfg.n_malfunctioning = k;
            SensitivityCell cell;
            cell.ana_scaling_s = s;
            cell.n_malfunctioning = k;
            cell.logs = run_experiment(cfg);
            for (const RoundLog& log : cell.logs)
                cell.mean_val_accuracy_per_round.push_back(mean_val_accuracy(log));
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

std::vector<GammaAblationCell> gamma_ablation(const ExperimentConfig& base,
                                              const std::vector<double>& gamma_values) {
    if (gamma_values.empty()) throw std::invalid_argument("gamma_ablation: no gamma values");
    std::vector<GammaAblationCell> cells;
    cells.reserve(gamma_values.size());
    for (const double g : gamma_values) {
        ExperimentConfig cfg = base;
        cfg.method = Method::lightyear;
        cfg.agreement.tau = -1.0;  // accept everyone; gamma is the only lever
        cfg.lightyear.gamma = g;
        GammaAblationCell cell;
        cell.gamma = g;
        cell.logs = run_experiment(cfg);
        for (const RoundLog& log : cell.logs)
            cell.mean_val_accuracy_per_round.push_back(mean_val_accuracy(log));
        cells.push_back(std::move(cell));
    }
    return cells;
}

ErrorDecomposition error_decomposition_probe(const ParamVector& h_clean, const ParamVector& h_corrupt,
                                             const LabeledDataset& source, const LabeledDataset& target) {
    require_same_spec(h_clean, h_corrupt, "error_decomposition_probe");
    ErrorDecomposition d;
    d.eps_source = 1.0 - accuracy(h_clean, source);
    d.eps_target_clean = 1.0 - accuracy(h_clean, target);
    d.eps_target_corrupt = 1.0 - accuracy(h_corrupt, target);
    d.model_error_estimate = d.eps_target_corrupt - d.eps_target_clean;
    return d;
}

std::string to_string(Method m) {
    switch (m) {
        case Method::lightyear: return "lightyear";
        case Method::fedavg: return "fedavg";
        case Method::krum: return "krum";
        case Method::balance: return "balance";
        case Method::scclip: return "scclip";
    }
    return "unknown";
}

std::string to_string(TopologyKind t) {
    switch (t) {
        case TopologyKind::p2p_full: return "p2p_full";
        case TopologyKind::star: return "star";
    }
    return "unknown";
}

std::string to_string(PartitionStrategy s) {
    switch (s) {
        case PartitionStrategy::dirichlet_label_skew: return "dirichlet_label_skew";
        case PartitionStrategy::feature_shift: return "feature_shift";
    }
    return "unknown";
}

}  // namespace lightyear
