#ifndef CBRN_MODEL_HPP
#define CBRN_MODEL_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbrn/pattern.hpp"

namespace cbrn {

struct SystemConfig {
    int image_width = 116;
    int image_height = 116;
    int neurons_per_ball = 7;
    double eps_w = 1.0;
    double eps_v = 1.0;
    double lambda_cb = 1.0;
    std::vector<double> theta_series = {100.0, 110.0};
    double threshold_d = 72.0;
    std::vector<std::string> chain_order = {"Color", "Shape", "Volume", "SpectacularView",
                                            "Constellation"};

    int pattern_dim() const { return image_width * image_height; }

    void validate() const {
        if (image_width < 1 || image_height < 1)
            throw std::invalid_argument("config: image dimensions must be >= 1");
        if (neurons_per_ball < 1)
            throw std::invalid_argument("config: neurons_per_ball must be >= 1");
        if (eps_w <= 0 || eps_v <= 0 || lambda_cb <= 0)
            throw std::invalid_argument("config: learning rates must be > 0");
        if (threshold_d <= 0) throw std::invalid_argument("config: threshold_d must be > 0");
        for (double t : theta_series)
            if (t < threshold_d)
                throw std::invalid_argument("config: every theta must be >= threshold_d");
        if (chain_order.size() < 2)
            throw std::invalid_argument("config: chain_order needs >= 2 balls");
        for (size_t i = 0; i < chain_order.size(); ++i)
            for (size_t j = i + 1; j < chain_order.size(); ++j)
                if (chain_order[i] == chain_order[j])
                    throw std::invalid_argument("config: duplicate ball name in chain_order");
    }
};

// One cue neuron: its private copy of the Recall Net weights (w, one entire
// stored image) and the cue weights feeding back from the net (v).
struct CueNeuron {
    std::vector<double> w_column;
    std::vector<double> v_row;
    bool learned = false;
    std::optional<std::string> stored_label;
};

struct CueBall {
    std::string attribute;
    std::vector<CueNeuron> neurons;
};

// Directed cue-to-cue weights between two adjacent balls, u[to][from].
struct CrossLink {
    std::string from_ball;
    std::string to_ball;
    std::vector<std::vector<double>> u;
};

struct CbrnSystem {
    SystemConfig config;
    std::vector<CueBall> balls;   // in chain order
    std::vector<CrossLink> links; // both directions per adjacent pair

    static CbrnSystem make(SystemConfig cfg = {}) {
        cfg.validate();
        CbrnSystem sys;
        sys.config = cfg;
        size_t dim = static_cast<size_t>(cfg.pattern_dim());
        for (const auto& name : cfg.chain_order) {
            CueBall ball;
            ball.attribute = name;
            ball.neurons.resize(static_cast<size_t>(cfg.neurons_per_ball));
            for (auto& n : ball.neurons) {
                n.w_column.assign(dim, 0.0);
                n.v_row.assign(dim, 0.0);
            }
            sys.balls.push_back(std::move(ball));
        }
        size_t n = static_cast<size_t>(cfg.neurons_per_ball);
        for (size_t i = 0; i + 1 < cfg.chain_order.size(); ++i) {
            for (auto [from, to] : {std::pair{i, i + 1}, std::pair{i + 1, i}}) {
                CrossLink link;
                link.from_ball = cfg.chain_order[from];
                link.to_ball = cfg.chain_order[to];
                link.u.assign(n, std::vector<double>(n, 0.0));
                sys.links.push_back(std::move(link));
            }
        }
        return sys;
    }

    CueBall& ball(const std::string& name) {
        for (auto& b : balls)
            if (b.attribute == name) return b;
        throw std::out_of_range("unknown ball: " + name);
    }
    const CueBall& ball(const std::string& name) const {
        return const_cast<CbrnSystem*>(this)->ball(name);
    }

    CrossLink& link(const std::string& from, const std::string& to) {
        for (auto& l : links)
            if (l.from_ball == from && l.to_ball == to) return l;
        throw std::out_of_range("no cross link " + from + " -> " + to);
    }
    const CrossLink& link(const std::string& from, const std::string& to) const {
        return const_cast<CbrnSystem*>(this)->link(from, to);
    }

    bool adjacent(const std::string& a, const std::string& b) const {
        for (size_t i = 0; i + 1 < config.chain_order.size(); ++i)
            if ((config.chain_order[i] == a && config.chain_order[i + 1] == b) ||
                (config.chain_order[i] == b && config.chain_order[i + 1] == a))
                return true;
        return false;
    }
};

// Recall-neuron outputs y_j = w_ji * x for one cue neuron; no sum over i.
inline std::vector<double> recall_output(const CueBall& ball, int neuron_index, double x) {
    if (neuron_index < 0 || neuron_index >= static_cast<int>(ball.neurons.size()))
        throw std::out_of_range("recall_output: neuron index out of range");
    if (x != 0.0 && x != 1.0)
        throw std::invalid_argument("recall_output: activation must be 0.0 or 1.0");
    const auto& w = ball.neurons[static_cast<size_t>(neuron_index)].w_column;
    std::vector<double> y(w.size());
    for (size_t j = 0; j < w.size(); ++j) y[j] = w[j] * x;
    return y;
}

// Cue pre-activation q_i = sum_j v_ij y_j.
inline double cue_preactivation(const CueBall& ball, int neuron_index,
                                const std::vector<double>& y) {
    if (neuron_index < 0 || neuron_index >= static_cast<int>(ball.neurons.size()))
        throw std::out_of_range("cue_preactivation: neuron index out of range");
    const auto& v = ball.neurons[static_cast<size_t>(neuron_index)].v_row;
    if (v.size() != y.size())
        throw std::invalid_argument("cue_preactivation: length mismatch");
    double q = 0.0;
    for (size_t j = 0; j < v.size(); ++j) q += v[j] * y[j];
    return q;
}

// Step function: 1.0 iff q >= d.
inline double threshold(double q, double d) { return q >= d ? 1.0 : 0.0; }

// Cross-ball pre-activation q_l = u[l][k] * x; one source neuron at a time.
inline double cross_preactivation(const CrossLink& link, int from_neuron, int to_neuron,
                                  double x) {
    if (to_neuron < 0 || to_neuron >= static_cast<int>(link.u.size()))
        throw std::out_of_range("cross_preactivation: to_neuron out of range");
    const auto& row = link.u[static_cast<size_t>(to_neuron)];
    if (from_neuron < 0 || from_neuron >= static_cast<int>(row.size()))
        throw std::out_of_range("cross_preactivation: from_neuron out of range");
    if (x != 0.0 && x != 1.0)
        throw std::invalid_argument("cross_preactivation: activation must be 0.0 or 1.0");
    return row[static_cast<size_t>(from_neuron)] * x;
}

} // namespace cbrn

#endif
