#ifndef CBRN_LEARNING_HPP
#define CBRN_LEARNING_HPP

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cbrn/model.hpp"
#include "cbrn/pattern.hpp"

namespace cbrn {

inline constexpr double kConvergenceTol = 1e-9;
inline constexpr int kMaxUpdates = 1000;

struct TrainingEntry {
    std::string phase;         // "w", "v" or "u"
    std::string ball_or_link;  // ball name, or "from->to"
    std::string neuron_or_edge; // neuron index, or "k->l"
    int iterations = 0;
    double final_error = 0.0;
    double final_q = 0.0;
};

struct TrainingReport {
    std::vector<TrainingEntry> entries;

    int count(const std::string& phase) const {
        int n = 0;
        for (const auto& e : entries) n += e.phase == phase ? 1 : 0;
        return n;
    }

    std::string to_csv() const {
        std::ostringstream out;
        out << "phase,ball,neuron_or_edge,iterations,final_error,final_q\n";
        out.precision(17);
        for (const auto& e : entries)
            out << e.phase << ',' << e.ball_or_link << ',' << e.neuron_or_edge << ','
                << e.iterations << ',' << e.final_error << ',' << e.final_q << '\n';
        return out.str();
    }
};

// One directed training series: the theta target and the cue-neuron index
// visited in each ball along the chain walk.
struct ChainSeries {
    int series_index = 0; // 1 or 2
    double theta = 0.0;
    std::vector<int> neuron_seq;
};

struct ChainSpec {
    int cmb = 0;
    std::string start_ball;
    std::vector<std::string> ball_order; // walk direction for this group
    std::vector<ChainSeries> series;
};

// The two default groups: cmb=0 walks the chain forward with series
// 0,1,2,3,4 / 0,4,3,2,1; cmb=1 walks it backward with 0,6,5,4,3 / 0,3,4,5,6.
inline std::vector<ChainSpec> default_chain_specs(const SystemConfig& cfg) {
    if (cfg.chain_order.size() != 5 || cfg.neurons_per_ball != 7 ||
        cfg.theta_series.size() != 2)
        throw std::invalid_argument(
            "default_chain_specs: requires 5 balls, 7 neurons, 2 theta values");
    ChainSpec g0;
    g0.cmb = 0;
    g0.ball_order = cfg.chain_order;
    g0.start_ball = g0.ball_order.front();
    g0.series = {{1, cfg.theta_series[0], {0, 1, 2, 3, 4}},
                 {2, cfg.theta_series[1], {0, 4, 3, 2, 1}}};
    ChainSpec g1;
    g1.cmb = 1;
    g1.ball_order.assign(cfg.chain_order.rbegin(), cfg.chain_order.rend());
    g1.start_ball = g1.ball_order.front();
    g1.series = {{1, cfg.theta_series[0], {0, 6, 5, 4, 3}},
                 {2, cfg.theta_series[1], {0, 3, 4, 5, 6}}};
    return {g0, g1};
}

inline void validate_chain_spec(const ChainSpec& spec, const SystemConfig& cfg) {
    if (spec.ball_order.size() != cfg.chain_order.size())
        throw std::invalid_argument("chain spec: ball_order length mismatch");
    for (const auto& s : spec.series) {
        if (s.neuron_seq.size() != spec.ball_order.size())
            throw std::invalid_argument("chain spec: neuron sequence length mismatch");
        for (int n : s.neuron_seq)
            if (n < 0 || n >= cfg.neurons_per_ball)
                throw std::invalid_argument("chain spec: neuron index out of range");
    }
}

// Stores one image in one cue neuron: w_ji += eps_w (d_j - y_j) x with x = 1,
// repeated until the reconstruction matches d. One update suffices at eps_w = 1.
inline TrainingEntry learn_w(CueBall& ball, int neuron_index, const PatternVector& d,
                             double eps_w = 1.0) {
    if (neuron_index < 0 || neuron_index >= static_cast<int>(ball.neurons.size()))
        throw std::out_of_range("learn_w: neuron index out of range");
    CueNeuron& neuron = ball.neurons[static_cast<size_t>(neuron_index)];
    if (neuron.w_column.size() != d.values.size())
        throw std::invalid_argument("learn_w: pattern dimension mismatch");
    if (neuron.learned && neuron.stored_label != d.source_label)
        throw std::runtime_error("learn_w: neuron " + std::to_string(neuron_index) + " of " +
                                 ball.attribute + " already stores '" +
                                 neuron.stored_label.value_or("") + "'");

    TrainingEntry entry{"w", ball.attribute, std::to_string(neuron_index), 0, 0.0, 0.0};
    constexpr double x = 1.0;
    for (int t = 0;; ++t) {
        double err = 0.0;      // E, Eq.-2-style half sum of squares
        double max_diff = 0.0;
        for (size_t j = 0; j < d.values.size(); ++j) {
            double diff = d.values[j] - neuron.w_column[j] * x;
            err += 0.5 * diff * diff;
            max_diff = std::max(max_diff, std::abs(diff));
        }
        entry.final_error = err;
        entry.iterations = t;
        if (max_diff < kConvergenceTol) break;
        if (t >= kMaxUpdates)
            throw std::runtime_error("learn_w: no convergence after " +
                                     std::to_string(kMaxUpdates) + " updates");
        for (size_t j = 0; j < d.values.size(); ++j)
            neuron.w_column[j] += eps_w * (d.values[j] - neuron.w_column[j] * x) * x;
    }
    neuron.learned = true;
    neuron.stored_label = d.source_label;
    return entry;
}

// Trains the cue weights so the stored image drives q to theta:
// v_ij += eps_v (theta - q) y_j with y reconstructed from the learned w (x = 1).
inline TrainingEntry learn_v(CueBall& ball, int neuron_index, double theta,
                             double eps_v = 1.0) {
    if (neuron_index < 0 || neuron_index >= static_cast<int>(ball.neurons.size()))
        throw std::out_of_range("learn_v: neuron index out of range");
    CueNeuron& neuron = ball.neurons[static_cast<size_t>(neuron_index)];
    if (!neuron.learned)
        throw std::runtime_error("learn_v: w of neuron " + std::to_string(neuron_index) +
                                 " of " + ball.attribute + " not learned yet");
    std::vector<double> y = recall_output(ball, neuron_index, 1.0);
    double norm_sq = 0.0;
    for (double yj : y) norm_sq += yj * yj;
    if (std::abs(std::sqrt(norm_sq) - 1.0) > 1e-6)
        throw std::runtime_error("learn_v: stored pattern is not unit-norm");

    TrainingEntry entry{"v", ball.attribute, std::to_string(neuron_index), 0, 0.0, 0.0};
    for (int t = 0;; ++t) {
        double q = cue_preactivation(ball, neuron_index, y);
        entry.final_q = q;
        entry.final_error = 0.5 * (theta - q) * (theta - q);
        entry.iterations = t;
        if (std::abs(theta - q) < kConvergenceTol) break;
        if (t >= kMaxUpdates)
            throw std::runtime_error("learn_v: no convergence after " +
                                     std::to_string(kMaxUpdates) + " updates");
        for (size_t j = 0; j < y.size(); ++j) neuron.v_row[j] += eps_v * (theta - q) * y[j];
    }
    return entry;
}

// Trains one directed cue-to-cue edge: u += lambda (theta - q) x with x = 1.
inline TrainingEntry learn_u(CrossLink& link, int from_neuron, int to_neuron, double theta,
                             double lambda_cb = 1.0, double x = 1.0) {
    if (x != 1.0)
        throw std::invalid_argument("learn_u: source neuron must fire (x = 1.0)");
    TrainingEntry entry{"u", link.from_ball + "->" + link.to_ball,
                        std::to_string(from_neuron) + "->" + std::to_string(to_neuron), 0, 0.0,
                        0.0};
    for (int t = 0;; ++t) {
        double q = cross_preactivation(link, from_neuron, to_neuron, x);
        entry.final_q = q;
        entry.final_error = 0.5 * (theta - q) * (theta - q);
        entry.iterations = t;
        if (std::abs(theta - q) < kConvergenceTol) break;
        if (t >= kMaxUpdates)
            throw std::runtime_error("learn_u: no convergence after " +
                                     std::to_string(kMaxUpdates) + " updates");
        link.u[static_cast<size_t>(to_neuron)][static_cast<size_t>(from_neuron)] +=
            lambda_cb * (theta - q) * x;
    }
    return entry;
}

// Full training pass: store every pattern (w), fit every cue weight (v) with
// theta_series[0], then train the cross edges of every group and series.
// Element index p trains cue neuron index i = p.
inline TrainingReport train_system(CbrnSystem& system,
                                   const std::map<std::string, std::vector<PatternImage>>& dataset,
                                   const std::vector<ChainSpec>& chains) {
    TrainingReport report;
    for (const auto& spec : chains) validate_chain_spec(spec, system.config);

    for (const auto& name : system.config.chain_order) {
        auto it = dataset.find(name);
        if (it == dataset.end())
            throw std::runtime_error("train_system: dataset has no patterns for ball " + name);
        if (static_cast<int>(it->second.size()) != system.config.neurons_per_ball)
            throw std::runtime_error("train_system: ball " + name + " needs " +
                                     std::to_string(system.config.neurons_per_ball) +
                                     " patterns, got " + std::to_string(it->second.size()));
    }

    for (const auto& name : system.config.chain_order) {
        CueBall& ball = system.ball(name);
        const auto& patterns = dataset.at(name);
        for (int i = 0; i < system.config.neurons_per_ball; ++i)
            report.entries.push_back(
                learn_w(ball, i, vectorize(patterns[static_cast<size_t>(i)]),
                        system.config.eps_w));
    }

    for (const auto& name : system.config.chain_order) {
        CueBall& ball = system.ball(name);
        for (int i = 0; i < system.config.neurons_per_ball; ++i)
            report.entries.push_back(
                learn_v(ball, i, system.config.theta_series[0], system.config.eps_v));
    }

    for (const auto& spec : chains) {
        for (const auto& series : spec.series) {
            for (size_t step = 0; step + 1 < spec.ball_order.size(); ++step) {
                CrossLink& link =
                    system.link(spec.ball_order[step], spec.ball_order[step + 1]);
                report.entries.push_back(
                    learn_u(link, series.neuron_seq[step], series.neuron_seq[step + 1],
                            series.theta, system.config.lambda_cb));
            }
        }
    }
    return report;
}

} // namespace cbrn

#endif
