#include <gtest/gtest.h>

#include "support/audit.hpp"
#include "support/test_util.hpp"

using namespace platekeeper;
using namespace platekeeper::workload;
using pktest::TempDir;

TEST(SplitMix64, ReferenceOutputs) {
    SplitMix64 zero(0);
    EXPECT_EQ(zero.next(), 0xe220a8397b1dcdafULL);
    SplitMix64 rng(1234567);
    EXPECT_EQ(rng.next(), 6457827717110365317ULL);
    EXPECT_EQ(rng.next(), 3203168211198807973ULL);
}

TEST(SplitMix64, UniformStaysInRange) {
    SplitMix64 rng(5);
    std::vector<int> hist(7);
    for (int i = 0; i < 70000; ++i) ++hist[rng.uniform(7)];
    for (int h : hist) EXPECT_NEAR(h, 10000, 500);
    for (int i = 0; i < 1000; ++i) {
        auto v = rng.between(200, 250);
        EXPECT_GE(v, 200u);
        EXPECT_LE(v, 250u);
    }
}

namespace {

SimulationSummary simulate(const std::filesystem::path& dir, SimulationSpec spec) {
    StoreOptions opts;
    opts.clock = shift_clock(spec.date);
    Store store(dir, opts);
    MaintenanceService service(store, policy::default_policy(Money{kFallbackCriticalPoint}), opts.clock);
    api::Api api(service, opts.clock);
    return simulate_day(api, service, spec);
}

void copy_store(const std::filesystem::path& from, const std::filesystem::path& to) {
    std::filesystem::copy_file(from / Store::kJournalFile, to / Store::kJournalFile);
}

}  // namespace

TEST(Seed, PopulatesCatalogAndPlates) {
    TempDir dir;
    auto summary = seed_store(dir.path(), {40, 3, 1, pktest::date("2024-01-01")});
    EXPECT_EQ(summary.plates, 40u);
    EXPECT_EQ(summary.companies, 3u);
    EXPECT_EQ(summary.to_text().substr(0, 12), "plates: 40\nc");
    Store store(dir.path());
    MaintenanceService service(store, policy::default_policy(Money{1}));
    EXPECT_EQ(service.plate_ids().size(), 40u);
    EXPECT_EQ(service.plate_ids().front(), "P-00001");
    EXPECT_TRUE(service.catalog().has_task("pulido"));
    EXPECT_TRUE(service.catalog().has_task("limpieza"));
    EXPECT_TRUE(service.catalog().has_condition("pandeada"));
}

TEST(Seed, DeterministicJournals) {
    TempDir a, b;
    seed_store(a.path(), {10, 3, 7, pktest::date("2024-01-01")});
    seed_store(b.path(), {10, 3, 7, pktest::date("2024-01-01")});
    compact_store(a.path());
    compact_store(b.path());
    EXPECT_EQ(pktest::slurp_file(a / Store::kJournalFile), pktest::slurp_file(b / Store::kJournalFile));
}

TEST(Seed, RefusesNonEmptyStore) {
    TempDir dir;
    seed_store(dir.path(), {5, 1, 0, pktest::date("2024-01-01")});
    try {
        seed_store(dir.path(), {5, 1, 0, pktest::date("2024-01-01")});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::StoreNotEmpty);
    }
}

TEST(Simulate, CountsAddUpAndRepeat) {
    TempDir seeded, a, b;
    seed_store(seeded.path(), {300, 3, 11, pktest::date("2024-01-01")});
    copy_store(seeded.path(), a.path());
    copy_store(seeded.path(), b.path());
    SimulationSpec spec;
    spec.count = 225;
    spec.date = pktest::date("2024-03-05");
    spec.rng_seed = 99;
    auto first = simulate(a.path(), spec);
    EXPECT_EQ(first.submitted, 225u);
    EXPECT_EQ(first.accepted + first.rejected(), 225u);
    EXPECT_GT(first.rejected_by_code["SAME_DATE"], 0u);  // 225 draws over 300 plates collide
    auto second = simulate(b.path(), spec);
    EXPECT_EQ(first, second);
    EXPECT_EQ(first.to_text(), second.to_text());
    EXPECT_EQ(pktest::slurp_file(a / Store::kJournalFile), pktest::slurp_file(b / Store::kJournalFile));
    EXPECT_TRUE(pktest::audit::cost_discrepancies(pktest::audit::load(a.path())).empty());
}

TEST(Simulate, ForcedCollision) {
    TempDir dir;
    seed_store(dir.path(), {5, 1, 0, pktest::date("2024-01-01")});
    SimulationSpec spec;
    spec.count = 2;
    spec.plate = "P-00003";
    auto s = simulate(dir.path(), spec);
    EXPECT_EQ(s.accepted, 1u);
    EXPECT_EQ(s.rejected(), 1u);
    EXPECT_EQ(s.rejected_by_code.at("SAME_DATE"), 1u);
}

TEST(Simulate, SampleDrawsFromDailyBand) {
    for (std::uint64_t seed : {1, 2, 3}) {
        TempDir dir;
        seed_store(dir.path(), {50, 2, 0, pktest::date("2024-01-01")});
        SimulationSpec spec;
        spec.sample = true;
        spec.rng_seed = seed;
        auto s = simulate(dir.path(), spec);
        EXPECT_GE(s.submitted, kMinDailyMaintenances);
        EXPECT_LE(s.submitted, kMaxDailyMaintenances);
    }
}

TEST(Simulate, UnseededStoreIsAnError) {
    TempDir dir;
    EXPECT_THROW(simulate(dir.path(), {}), Error);
}
