#include <doctest.h>

#include "cbrn/archive.hpp"
#include "cbrn/recall.hpp"
#include "test_helpers.hpp"

using namespace cbrn;
using cbrn_test::default_dataset;
using cbrn_test::trained_default_system;

TEST_CASE("save_weights is deterministic") {
    const CbrnSystem& sys = trained_default_system();
    CHECK(save_weights(sys) == save_weights(sys));
}

TEST_CASE("untrained archive has the predictable size") {
    CbrnSystem sys = CbrnSystem::make(SystemConfig{});
    std::string bytes = save_weights(sys);
    // header: magic 4 + version 4
    size_t expected = 8;
    // config: 3 u32 + 3 f64 + theta count u32 + 2 f64 + D f64 + ball count u32
    expected += 3 * 4 + 3 * 8 + 4 + 2 * 8 + 8 + 4;
    for (const auto& name : sys.config.chain_order) expected += 4 + name.size();
    // 5 balls x 7 neurons: flag 1 + label len 4 + 2 arrays of 13456 f64
    expected += 5 * 7 * (1 + 4 + 2 * 13456 * 8);
    // link count + 8 links: two names + 7x7 f64
    expected += 4;
    for (const auto& link : sys.links)
        expected += 4 + link.from_ball.size() + 4 + link.to_ball.size() + 7 * 7 * 8;
    CHECK(bytes.size() == expected);
}

TEST_CASE("archive round-trip is bit-exact") {
    const CbrnSystem& sys = trained_default_system();
    std::string bytes = save_weights(sys);
    CbrnSystem back = load_weights(bytes);
    CHECK(save_weights(back) == bytes);

    CHECK(back.config.chain_order == sys.config.chain_order);
    CHECK(back.config.theta_series == sys.config.theta_series);
    CHECK(back.config.threshold_d == sys.config.threshold_d);
    for (size_t b = 0; b < sys.balls.size(); ++b)
        for (size_t i = 0; i < sys.balls[b].neurons.size(); ++i) {
            CHECK(back.balls[b].neurons[i].w_column == sys.balls[b].neurons[i].w_column);
            CHECK(back.balls[b].neurons[i].v_row == sys.balls[b].neurons[i].v_row);
            CHECK(back.balls[b].neurons[i].learned == sys.balls[b].neurons[i].learned);
            CHECK(back.balls[b].neurons[i].stored_label == sys.balls[b].neurons[i].stored_label);
        }
    for (size_t l = 0; l < sys.links.size(); ++l) CHECK(back.links[l].u == sys.links[l].u);
}

TEST_CASE("a reloaded system recalls identically") {
    const CbrnSystem& sys = trained_default_system();
    CbrnSystem back = load_weights(save_weights(sys));
    PatternVector red = vectorize(default_dataset().at("Color")[0]);
    CHECK(trace_csv(chain_recall(sys, 0, red)) == trace_csv(chain_recall(back, 0, red)));
}

TEST_CASE("load_weights reports distinct failure modes") {
    std::string good = save_weights(CbrnSystem::make(SystemConfig{}));

    std::string bad_magic = good;
    bad_magic[0] = 'X';
    CHECK_THROWS_WITH_AS(load_weights(bad_magic), doctest::Contains("bad magic"), ArchiveError);

    std::string bad_version = good;
    bad_version[4] = 9;
    CHECK_THROWS_WITH_AS(load_weights(bad_version), doctest::Contains("unsupported archive version"),
                         ArchiveError);

    std::string truncated = good.substr(0, good.size() / 2);
    CHECK_THROWS_WITH_AS(load_weights(truncated), doctest::Contains("truncated at offset"),
                         ArchiveError);

    std::string trailing = good + "junk";
    CHECK_THROWS_WITH_AS(load_weights(trailing), doctest::Contains("trailing garbage"),
                         ArchiveError);

    CHECK_THROWS_AS(load_weights(""), ArchiveError);
}

TEST_CASE("load_weights rejects an invariant-violating payload") {
    CbrnSystem sys = CbrnSystem::make(SystemConfig{});
    // unlearned neuron with a nonzero w must not decode
    sys.balls[0].neurons[0].w_column[0] = 0.5;
    CHECK_THROWS_WITH_AS(load_weights(save_weights(sys)), doctest::Contains("invariant"),
                         ArchiveError);
}
