#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lightyear/aggregate.hpp"
#include "lightyear/agreement.hpp"
#include "lightyear/attacks.hpp"
#include "lightyear/data.hpp"
#include "lightyear/metrics.hpp"
#include "lightyear/nn.hpp"

namespace lightyear {

enum class TopologyKind { p2p_full, star };
enum class Method { lightyear, fedavg, krum, balance, scclip };

enum class PartitionStrategy { dirichlet_label_skew, feature_shift };

struct DataConfig {
    PartitionStrategy strategy = PartitionStrategy::dirichlet_label_skew;
    double dirichlet_alpha = 0.5;
    double group_rotation_deg = 180.0;
    double group_shift = 0.0;
    int samples_per_client = 150;
    std::array<double, 3> split_fractions{0.7, 0.15, 0.15};
    int n_classes = 4;
    int n_features = 8;
    double class_sep = 4.0;

    void validate() const;
};

struct SweepConfig {
    int max_attackers = 3;
    std::vector<double> s_values{0.0, 50.0, 120.5};
    std::vector<int> attacker_counts{1, 3};
    std::vector<double> gamma_values{1.0, 0.95};

    void validate() const;
};

struct ExperimentConfig {
    std::uint64_t master_seed = 1;
    int n_clients = 8;
    int rounds = 12;
    int n_malfunctioning = 0;
    int workers = 1;
    Method method = Method::lightyear;
    TopologyKind topology = TopologyKind::p2p_full;
    AttackSpec attack;
    AgreementConfig agreement;
    LightyearConfig lightyear;
    BaselineConfig baseline;
    DataConfig data;
    std::vector<int> hidden_sizes{16};
    Activation activation = Activation::relu;
    Hyper optimizer;
    SweepConfig sweep;

    ModelSpec model_spec() const;
    void validate() const;
};

struct ClientRound {
    int client_id = 0;
    AttackKind attack_kind = AttackKind::none;  // what this client broadcast this round
    double test_accuracy = 0.0;
    double val_accuracy = 0.0;
    double ece = 0.0;
    std::set<int> selected;                 // lightyear only: accepted peer ids
    std::map<int, double> composite_scores;  // lightyear only: peer id -> score
};

struct RoundLog {
    int round = 0;
    std::vector<ClientRound> clients;  // ascending client id
};

struct ClientState {
    int id = 0;
    ParamVector model;
    OptimizerState opt;
    LabeledDataset train;
    LabeledDataset val;
    LabeledDataset test;
    AttackSpec malfunction;  // kind none for honest clients
    double scclip_radius = 0.0;  // resolved on first use when configured as 0
};

// One experiment instance: builds the task, partitions it, initializes the
// clients, then advances round by round. Malfunctioning clients train and
// evaluate on their honest state; corruption touches only what they
// broadcast.
class Federation {
public:
    explicit Federation(const ExperimentConfig& cfg);

    // Rounds are numbered from 1. Must be called with consecutive values.
    RoundLog run_round(int round_t);
    std::vector<RoundLog> run_all();

    const ExperimentConfig& config() const { return cfg_; }
    const std::vector<ClientState>& clients() const { return clients_; }
    const std::set<int>& malfunctioning() const { return malfunctioning_; }
    const ParamVector& server_model() const;
    // What each client put on the wire in the most recent round; empty
    // before the first round. Corrupted entries appear as broadcast.
    const std::vector<ParamVector>& last_broadcasts() const { return last_broadcasts_; }

private:
    ExperimentConfig cfg_;
    std::vector<ClientState> clients_;
    std::set<int> malfunctioning_;
    std::optional<ClientState> server_;  // star topology only
    std::vector<ParamVector> last_broadcasts_;
    int next_round_ = 1;

    ParamVector aggregate_for_client(int i, const ParamVector& own_trained,
                                     const std::vector<ParamVector>& broadcasts, int round_t,
                                     ClientRound& log);
};

std::vector<RoundLog> run_experiment(const ExperimentConfig& cfg);

// Mean over clients of one RoundLog column.
double mean_test_accuracy(const RoundLog& log);
double mean_val_accuracy(const RoundLog& log);

struct AttackerSweepCell {
    int n_malfunctioning = 0;
    std::set<int> attacker_ids;
    double final_mean_test_accuracy = 0.0;
    std::vector<RoundLog> logs;
};

// Runs k = 0..max_attackers with everything else held fixed. Attacker sets
// are nested: the k-attacker set is the first k entries of one seeded
// ordering, so adjacent cells differ by exactly one client.
std::vector<AttackerSweepCell> attacker_sweep(const ExperimentConfig& base, int max_attackers);

struct SensitivityCell {
    double ana_scaling_s = 0.0;
    int n_malfunctioning = 0;
    std::vector<RoundLog> logs;
    std::vector<double> mean_val_accuracy_per_round;
};

// Grid over scaled-ANA severity x attacker count. The base attack kind must
// be ana with the scaled form.
std::vector<SensitivityCell> sensitivity_sweep(const ExperimentConfig& base,
                                               const std::vector<double>& s_values,
                                               const std::vector<int>& attacker_counts);

struct GammaAblationCell {
    double gamma = 0.0;
    std::vector<RoundLog> logs;
    std::vector<double> mean_val_accuracy_per_round;
};

// Isolates the decay factor: method forced to the agreement protocol with
// tau = -1 so every peer is always accepted and gamma is the only lever.
std::vector<GammaAblationCell> gamma_ablation(const ExperimentConfig& base,
                                              const std::vector<double>& gamma_values);

struct ErrorDecomposition {
    double eps_source = 0.0;         // clean model on source data
    double eps_target_clean = 0.0;   // clean model on target data
    double eps_target_corrupt = 0.0; // corrupted model on target data
    double model_error_estimate = 0.0;  // eps_target_corrupt - eps_target_clean
};

ErrorDecomposition error_decomposition_probe(const ParamVector& h_clean,
                                             const ParamVector& h_corrupt,
                                             const LabeledDataset& source,
                                             const LabeledDataset& target);

std::string to_string(Method m);
std::string to_string(TopologyKind t);
std::string to_string(PartitionStrategy s);

}  // namespace lightyear
