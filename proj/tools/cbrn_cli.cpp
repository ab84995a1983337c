// Command-line front end: dataset generation, training, q-table inspection,
// chain recall and image rendering over CBRN weight archives.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cbrn/cbrn.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write file: " + path);
    f << content;
    if (!f) throw std::runtime_error("write failed: " + path);
}

cbrn::CbrnSystem load_system(const std::string& weights_path) {
    return cbrn::load_weights(read_file(weights_path));
}

// Locates the neuron storing `label` in `ball` and rebuilds its unit-norm
// pattern through the recall net (x = 1).
std::pair<int, cbrn::PatternVector> stored_pattern(const cbrn::CbrnSystem& system,
                                                   const std::string& ball_name,
                                                   const std::string& label) {
    const cbrn::CueBall& ball = system.ball(ball_name);
    for (size_t i = 0; i < ball.neurons.size(); ++i) {
        if (ball.neurons[i].learned && ball.neurons[i].stored_label == label) {
            cbrn::PatternVector p;
            p.values = cbrn::recall_output(ball, static_cast<int>(i), 1.0);
            p.source_label = label;
            return {static_cast<int>(i), p};
        }
    }
    throw std::runtime_error("no neuron of ball " + ball_name + " stores label '" + label +
                             "'");
}

int cmd_gen_dataset(const std::string& out_dir, std::string manifest_path, int width,
                    int height, bool force) {
    fs::create_directories(out_dir);
    if (manifest_path.empty()) manifest_path = (fs::path(out_dir) / "manifest.tsv").string();
    cbrn::DatasetManifest manifest = cbrn::default_manifest();
    for (auto& [attr, elems] : manifest.attributes) {
        for (auto& e : elems) {
            std::string filename = e.label + ".pbm";
            fs::path path = fs::path(out_dir) / filename;
            if (fs::exists(path) && !force)
                throw std::runtime_error(path.string() + " exists (use --force to overwrite)");
            write_file(path.string(), cbrn::save_pbm(cbrn::synth_pattern(e.label, width, height)));
            e.source = filename;
        }
    }
    if (fs::exists(manifest_path) && !force)
        throw std::runtime_error(manifest_path + " exists (use --force to overwrite)");
    write_file(manifest_path, cbrn::write_manifest(manifest));
    int count = 0;
    for (const auto& [attr, elems] : manifest.attributes) count += static_cast<int>(elems.size());
    std::cout << "wrote " << count << " pattern files to " << out_dir << " and manifest "
              << manifest_path << "\n";
    return 0;
}

int cmd_train(const std::string& manifest_path, const std::string& weights_out,
              const std::string& report_out, cbrn::SystemConfig config) {
    cbrn::DatasetManifest manifest;
    std::string base_dir;
    if (manifest_path.empty()) {
        manifest = cbrn::default_manifest();
    } else {
        manifest = cbrn::parse_manifest(read_file(manifest_path));
        base_dir = fs::path(manifest_path).parent_path().string();
    }
    auto dataset =
        cbrn::resolve_patterns(manifest, config.image_width, config.image_height, base_dir);

    cbrn::CbrnSystem system = cbrn::CbrnSystem::make(config);
    cbrn::TrainingReport report =
        cbrn::train_system(system, dataset, cbrn::default_chain_specs(config));
    write_file(weights_out, cbrn::save_weights(system));
    if (!report_out.empty()) write_file(report_out, report.to_csv());

    int u_per_cmb = 2 * (static_cast<int>(config.chain_order.size()) - 1);
    std::cout << "trained: " << report.count("w") << " w-learnings, " << report.count("v")
              << " v-learnings, " << report.count("u") << " u-learnings (" << u_per_cmb
              << " per cmb group)\n";
    double max_q_err = 0.0;
    for (const auto& e : report.entries)
        if (e.phase != "w") max_q_err = std::max(max_q_err, std::sqrt(2.0 * e.final_error));
    std::cout << "max |theta - q| after training: " << max_q_err << "\n";
    std::cout << "weights written to " << weights_out << "\n";
    return 0;
}

int cmd_qtable(const std::string& weights_path, const std::string& ball_name,
               const std::string& label) {
    cbrn::CbrnSystem system = load_system(weights_path);
    auto [index, pattern] = stored_pattern(system, ball_name, label);
    cbrn::BallResponse r = cbrn::identify(system, ball_name, pattern);
    std::cout << "ball " << ball_name << ", presented \"" << label << "\" (neuron " << index
              << ")\n";
    std::cout << "neuron\tq\tfired\targmax\n";
    for (size_t i = 0; i < r.q_values.size(); ++i) {
        bool fired = false;
        for (const auto& f : r.fired) fired |= f.neuron == static_cast<int>(i);
        std::cout << i << '\t' << r.q_values[i] << '\t' << (fired ? 1 : 0) << '\t'
                  << (r.argmax_index == static_cast<int>(i) ? "*" : "") << '\n';
    }
    return 0;
}

int cmd_chain(const std::string& weights_path, int cmb, const std::string& label,
              const std::string& format, const std::string& out_path) {
    cbrn::CbrnSystem system = load_system(weights_path);
    std::string start_ball =
        cmb == 0 ? system.config.chain_order.front() : system.config.chain_order.back();
    // A label stored in some other ball is a usage error, not a recall failure.
    for (const auto& ball : system.balls) {
        for (const auto& n : ball.neurons) {
            if (n.learned && n.stored_label == label && ball.attribute != start_ball)
                throw std::runtime_error("label '" + label + "' is stored in ball " +
                                         ball.attribute + ", but cmb=" + std::to_string(cmb) +
                                         " starts at " + start_ball);
        }
    }
    auto [index, pattern] = stored_pattern(system, start_ball, label);
    (void)index;
    cbrn::RecallTrace trace = cbrn::chain_recall(system, cmb, pattern);
    std::string rendered =
        format == "csv" ? cbrn::trace_csv(trace) : cbrn::trace_text(trace);
    if (out_path.empty())
        std::cout << rendered;
    else
        write_file(out_path, rendered);
    if (trace.failed) {
        std::cerr << trace.failure_reason << "\n";
        return 1;
    }
    return 0;
}

int cmd_render(const std::string& weights_path, const std::string& ball_name, int neuron,
               const std::string& out_path, bool ascii) {
    cbrn::CbrnSystem system = load_system(weights_path);
    cbrn::PatternImage img = cbrn::reconstruct(system, ball_name, neuron);
    if (ascii) std::cout << cbrn::ascii_render(img);
    if (!out_path.empty()) {
        write_file(out_path, cbrn::save_pbm(img));
        std::cout << "wrote " << out_path << " (\"" << img.label << "\")\n";
    } else if (!ascii) {
        throw std::runtime_error("render: pass --out FILE and/or --ascii");
    }
    return 0;
}

int cmd_verify(const std::string& weights_path) {
    cbrn::CbrnSystem system = load_system(weights_path);
    int checked = 0;
    int bad = 0;
    for (const auto& ball : system.balls) {
        for (size_t i = 0; i < ball.neurons.size(); ++i) {
            if (!ball.neurons[i].learned) continue;
            cbrn::PatternVector p;
            p.values = cbrn::recall_output(ball, static_cast<int>(i), 1.0);
            p.source_label = ball.neurons[i].stored_label.value_or("");
            cbrn::BallResponse r = cbrn::identify(system, ball.attribute, p);
            ++checked;
            if (r.argmax_index != static_cast<int>(i)) {
                ++bad;
                std::cerr << "identification failed: " << ball.attribute << " neuron " << i
                          << " -> argmax " << r.argmax_index << "\n";
            }
        }
    }
    bool roundtrip = cbrn::save_weights(cbrn::load_weights(cbrn::save_weights(system))) ==
                     cbrn::save_weights(system);
    std::cout << "identification: " << (checked - bad) << "/" << checked << " learned neurons\n";
    std::cout << "archive round-trip: " << (roundtrip ? "ok" : "FAILED") << "\n";
    return (bad == 0 && roundtrip) ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cue Ball / Recall Net associative memory"};
    app.require_subcommand(1);

    std::string manifest_path, weights_path, out_path, report_path, label, ball_name, format =
                                                                                          "text";
    std::string out_dir = "dataset";
    int width = 116, height = 116, cmb = 0, neuron = 0;
    bool force = false, ascii = false;
    std::vector<double> theta = {100.0, 110.0};
    double threshold_d = 72.0;

    auto* gen = app.add_subcommand("gen-dataset", "Write the default synthetic dataset");
    gen->add_option("--out", out_dir, "Output directory")->capture_default_str();
    gen->add_option("--manifest", manifest_path, "Manifest output path (default <out>/manifest.tsv)");
    gen->add_option("--width", width)->capture_default_str();
    gen->add_option("--height", height)->capture_default_str();
    gen->add_flag("--force", force, "Overwrite existing files");

    auto* train = app.add_subcommand("train", "Train all weights and save an archive");
    train->add_option("--manifest", manifest_path, "Dataset manifest (default: built-in synthetic)")
        ->envname("CBRN_MANIFEST");
    train->add_option("--weights-out", weights_path, "Weight archive output path")
        ->envname("CBRN_WEIGHTS")
        ->required();
    train->add_option("--report", report_path, "Also write the training report CSV here");
    train->add_option("--theta", theta, "Learning target per series")->expected(1, -1);
    train->add_option("--threshold", threshold_d, "Firing threshold D")->capture_default_str();
    train->add_option("--width", width)->capture_default_str();
    train->add_option("--height", height)->capture_default_str();

    auto* qtable = app.add_subcommand("qtable", "Print every cue neuron's q for one pattern");
    qtable->add_option("--weights", weights_path)->envname("CBRN_WEIGHTS")->required();
    qtable->add_option("--ball", ball_name)->required();
    qtable->add_option("--label", label)->required();

    auto* chain = app.add_subcommand("chain", "Run chain recall from a stored pattern");
    chain->add_option("--weights", weights_path)->envname("CBRN_WEIGHTS")->required();
    chain->add_option("--cmb", cmb, "Group id (0 or 1)")->check(CLI::Range(0, 1))->required();
    chain->add_option("--label", label, "Stored label of the start ball")->required();
    chain->add_option("--format", format)->check(CLI::IsMember({"csv", "text"}))
        ->capture_default_str();
    chain->add_option("--out", out_path, "Write the trace here instead of stdout");

    auto* render = app.add_subcommand("render", "Reconstruct a learned neuron's image");
    render->add_option("--weights", weights_path)->envname("CBRN_WEIGHTS")->required();
    render->add_option("--ball", ball_name)->required();
    render->add_option("--neuron", neuron)->required();
    render->add_option("--out", out_path, "PBM output path");
    render->add_flag("--ascii", ascii, "Print the image as text");

    auto* verify = app.add_subcommand("verify", "Check identification and archive round-trip");
    verify->add_option("--weights", weights_path)->envname("CBRN_WEIGHTS")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_dataset(out_dir, manifest_path, width, height, force);
        if (train->parsed()) {
            cbrn::SystemConfig config;
            config.image_width = width;
            config.image_height = height;
            config.theta_series = theta;
            config.threshold_d = threshold_d;
            return cmd_train(manifest_path, weights_path, report_path, config);
        }
        if (qtable->parsed()) return cmd_qtable(weights_path, ball_name, label);
        if (chain->parsed()) return cmd_chain(weights_path, cmb, label, format, out_path);
        if (render->parsed()) return cmd_render(weights_path, ball_name, neuron, out_path, ascii);
        if (verify->parsed()) return cmd_verify(weights_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
