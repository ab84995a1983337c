#ifndef CBRN_RECALL_HPP
#define CBRN_RECALL_HPP

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "cbrn/model.hpp"
#include "cbrn/pattern.hpp"

namespace cbrn {

struct Firing {
    int neuron = 0;
    double q = 0.0;
};

struct BallResponse {
    std::string ball;
    std::vector<double> q_values;       // one per cue neuron
    std::vector<Firing> fired;          // q >= D, ascending neuron index
    int argmax_index = 0;               // ties break to the lowest index
};

struct RecalledImage {
    std::string ball;
    int neuron = 0;
    double q = 0.0;
    std::string label;
    PatternImage image;
};

struct RecallTrace {
    int cmb = 0;
    std::vector<BallResponse> responses; // along the chain walk
    std::vector<RecalledImage> recalled; // one per fired learned neuron
    bool failed = false;
    std::string failure_reason;
};

// Rebuilds the stored image of a learned neuron from its w column (x = 1).
inline PatternImage reconstruct(const CbrnSystem& system, const std::string& ball_name,
                                int neuron_index) {
    const CueBall& ball = system.ball(ball_name);
    if (neuron_index < 0 || neuron_index >= static_cast<int>(ball.neurons.size()))
        throw std::out_of_range("reconstruct: neuron index out of range");
    const CueNeuron& neuron = ball.neurons[static_cast<size_t>(neuron_index)];
    if (!neuron.learned)
        throw std::runtime_error("reconstruct: neuron " + std::to_string(neuron_index) +
                                 " of " + ball_name + " is not learned");
    std::vector<double> y = recall_output(ball, neuron_index, 1.0);
    PatternImage img;
    img.width = system.config.image_width;
    img.height = system.config.image_height;
    img.label = neuron.stored_label.value_or("");
    img.bits.resize(y.size());
    for (size_t j = 0; j < y.size(); ++j) img.bits[j] = y[j] > 1e-12 ? 1 : 0;
    return img;
}

// Presents a pattern to one ball's recall net and reads every cue neuron.
inline BallResponse identify(const CbrnSystem& system, const std::string& ball_name,
                             const PatternVector& presented) {
    const CueBall& ball = system.ball(ball_name);
    if (static_cast<int>(presented.values.size()) != system.config.pattern_dim())
        throw std::invalid_argument("identify: pattern dimension mismatch");
    double norm_sq = 0.0;
    for (double v : presented.values) norm_sq += v * v;
    if (std::abs(std::sqrt(norm_sq) - 1.0) > 1e-6)
        throw std::invalid_argument("identify: presented pattern is not unit-norm");

    BallResponse r;
    r.ball = ball_name;
    for (size_t i = 0; i < ball.neurons.size(); ++i) {
        double q = cue_preactivation(ball, static_cast<int>(i), presented.values);
        r.q_values.push_back(q);
        if (threshold(q, system.config.threshold_d) == 1.0)
            r.fired.push_back({static_cast<int>(i), q});
        if (q > r.q_values[static_cast<size_t>(r.argmax_index)]) r.argmax_index = static_cast<int>(i);
    }
    return r;
}

// Carries the previous ball's firings across the link; a target hit by
// several sources takes the max contribution.
inline BallResponse propagate(const CbrnSystem& system, const std::string& from_ball,
                              const std::string& to_ball, const std::vector<Firing>& fired) {
    if (!system.adjacent(from_ball, to_ball))
        throw std::invalid_argument("propagate: " + from_ball + " and " + to_ball +
                                    " are not adjacent in the chain");
    if (fired.empty()) throw std::invalid_argument("propagate: empty fired set");
    const CrossLink& link = system.link(from_ball, to_ball);

    BallResponse r;
    r.ball = to_ball;
    for (int l = 0; l < system.config.neurons_per_ball; ++l) {
        double q = 0.0;
        for (const Firing& f : fired)
            q = std::max(q, cross_preactivation(link, f.neuron, l, 1.0));
        r.q_values.push_back(q);
        if (threshold(q, system.config.threshold_d) == 1.0) r.fired.push_back({l, q});
        if (q > r.q_values[static_cast<size_t>(r.argmax_index)]) r.argmax_index = l;
    }
    return r;
}

// Algorithm: identify in the group's start ball, then walk the chain in the
// group's direction, reconstructing the image behind every fired neuron.
inline RecallTrace chain_recall(const CbrnSystem& system, int cmb,
                                const PatternVector& presented) {
    if (cmb != 0 && cmb != 1) throw std::invalid_argument("chain_recall: cmb must be 0 or 1");
    std::vector<std::string> walk = system.config.chain_order;
    if (cmb == 1) std::reverse(walk.begin(), walk.end());

    RecallTrace trace;
    trace.cmb = cmb;

    auto record = [&](const BallResponse& r) {
        trace.responses.push_back(r);
        const CueBall& ball = system.ball(r.ball);
        for (const Firing& f : r.fired) {
            const CueNeuron& n = ball.neurons[static_cast<size_t>(f.neuron)];
            if (!n.learned) continue;
            trace.recalled.push_back({r.ball, f.neuron, f.q, n.stored_label.value_or(""),
                                      reconstruct(system, r.ball, f.neuron)});
        }
    };

    BallResponse r = identify(system, walk.front(), presented);
    record(r);
    if (r.fired.empty()) {
        trace.failed = true;
        trace.failure_reason = "recall failed: no cue neuron of " + walk.front() +
                               " reached the threshold";
        return trace;
    }
    for (size_t step = 0; step + 1 < walk.size(); ++step) {
        r = propagate(system, walk[step], walk[step + 1], trace.responses.back().fired);
        record(r);
        if (r.fired.empty()) {
            trace.failed = true;
            trace.failure_reason = "chain truncated: no firing in " + walk[step + 1];
            return trace;
        }
    }
    return trace;
}

inline std::string trace_csv(const RecallTrace& trace) {
    std::ostringstream out;
    out << "cmb,ball,neuron,q,fired,label\n";
    out.precision(17);
    for (const auto& r : trace.responses) {
        for (size_t i = 0; i < r.q_values.size(); ++i) {
            bool fired = false;
            std::string label;
            for (const auto& f : r.fired) fired |= f.neuron == static_cast<int>(i);
            for (const auto& img : trace.recalled)
                if (img.ball == r.ball && img.neuron == static_cast<int>(i)) label = img.label;
            out << trace.cmb << ',' << r.ball << ',' << i << ',' << r.q_values[i] << ','
                << (fired ? 1 : 0) << ',' << label << '\n';
        }
    }
    return out.str();
}

inline std::string trace_text(const RecallTrace& trace, bool with_images = true) {
    std::ostringstream out;
    out << "chain recall, cmb=" << trace.cmb << "\n";
    for (const auto& r : trace.responses) {
        out << "[" << r.ball << "] fired:";
        if (r.fired.empty()) out << " (none)";
        for (const auto& f : r.fired) out << " " << f.neuron << " (q=" << f.q << ")";
        out << "\n";
    }
    if (trace.failed) out << trace.failure_reason << "\n";
    if (with_images) {
        for (const auto& img : trace.recalled) {
            out << "\n" << img.ball << " neuron " << img.neuron << " \"" << img.label
                << "\" q=" << img.q << "\n";
            out << ascii_render(img.image);
        }
    }
    return out.str();
}

} // namespace cbrn

#endif
