#include <random>

#include <gtest/gtest.h>

#include "support/audit.hpp"
#include "support/test_util.hpp"

using namespace platekeeper;
using pktest::date;
using pktest::submission;
using pktest::TempDir;

namespace {

class ServiceTest : public ::testing::Test {
protected:
    void SetUp() override { open(); }

    void open(policy::NodePtr policy = policy::default_policy(Money{100000})) {
        service_.reset();
        store_.reset();
        StoreOptions opts;
        opts.clock = clock_;
        store_ = std::make_unique<Store>(dir_.path(), opts);
        service_ = std::make_unique<MaintenanceService>(*store_, std::move(policy), clock_);
        if (service_->catalog().tasks.empty()) pktest::seed_catalog(*service_);
    }

    void add_plate(const std::string& id) {
        ASSERT_TRUE(svc().register_new_plate(id, Position::make(1, 1, 1), date("2024-01-01"), OperatorId{"OP-1"})
                        .accepted());
    }

    Plate plate(const std::string& id) const { return store_->get_as<Plate>(id); }
    std::string journal_bytes() const { return journal::read_file(store_->journal_path().string()); }
    MaintenanceService& svc() { return *service_; }

    TempDir dir_;
    std::function<Timestamp()> clock_ = pktest::ticking_clock("2024-03-01");
    std::unique_ptr<Store> store_;
    std::unique_ptr<MaintenanceService> service_;
};

}  // namespace

TEST_F(ServiceTest, RegisterPlate) {
    auto out = svc().register_new_plate("P-0001", Position::make(1, 1, 1), date("2024-01-01"), OperatorId{"OP"});
    EXPECT_TRUE(out.accepted());
    EXPECT_EQ(out.entity_id, "P-0001");
    EXPECT_EQ(out.new_version, 1u);
    auto dup = svc().register_new_plate("P-0001", Position::make(1, 1, 1), date("2024-01-01"), OperatorId{"OP"});
    EXPECT_EQ(dup.deny_code, "DUPLICATE_PLATE");
    auto bad = svc().register_new_plate("p 1", Position::make(1, 1, 1), date("2024-01-01"), OperatorId{"OP"});
    EXPECT_EQ(bad.deny_code, "MALFORMED_ID");
}

TEST_F(ServiceTest, RegisterSixteenThousand) {
    for (int i = 1; i <= 16000; ++i) add_plate(workload::plate_id_for(i, 16000));
    EXPECT_EQ(svc().plate_ids().size(), 16000u);
}

TEST_F(ServiceTest, ChangePosition) {
    add_plate("P-1");
    auto out = svc().change_plate_position("P-1", Position::make(3, 4, 5));
    EXPECT_TRUE(out.accepted());
    EXPECT_EQ(out.new_version, 2u);
    EXPECT_EQ(plate("P-1").position, Position::make(3, 4, 5));
    EXPECT_EQ(svc().change_plate_position("P-404", Position::make(1, 1, 1)).deny_code, "NOT_FOUND");
    svc().decommission_plate("P-1");
    EXPECT_EQ(svc().change_plate_position("P-1", Position::make(1, 1, 1)).deny_code, "PLATE_DECOMMISSIONED");
}

TEST_F(ServiceTest, Decommission) {
    add_plate("P-1");
    EXPECT_TRUE(svc().decommission_plate("P-1").accepted());
    EXPECT_EQ(plate("P-1").status, LifecycleStatus::Decommissioned);
    EXPECT_EQ(svc().create_maintenance(submission("P-1", "2024-03-05")).deny_code, "PLATE_DECOMMISSIONED");
    EXPECT_EQ(svc().decommission_plate("P-1").deny_code, "ALREADY_DECOMMISSIONED");
    EXPECT_EQ(svc().decommission_plate("P-404").deny_code, "NOT_FOUND");
}

TEST_F(ServiceTest, CreateMaintenanceAddsCost) {
    add_plate("P-1");
    svc().change_plate_position("P-1", Position::make(2, 2, 2));
    auto out = svc().create_maintenance(submission("P-1", "2024-03-05", {{"pulido", 1200}, {"limpieza", 800}}, {"pandeada"}));
    ASSERT_TRUE(out.accepted()) << out.message;
    EXPECT_EQ(out.cumulative_cost, Money{2000});  // 1200 + 800
    auto p = plate("P-1");
    EXPECT_EQ(p.cumulative_cost, Money{2000});
    EXPECT_EQ(p.conditions, ConditionSet{"pandeada"});
    EXPECT_EQ(p.status, LifecycleStatus::InStock);
    auto rec = store_->get_as<MaintenanceRecord>(*out.entity_id);
    EXPECT_EQ(rec.total_cost, Money{2000});
    EXPECT_EQ(rec.date, date("2024-03-05"));
    EXPECT_EQ(CalendarDate::of(rec.timestamp), rec.date);
}

TEST_F(ServiceTest, CatalogDefaultsCost) {
    add_plate("P-1");
    auto out = svc().create_maintenance(submission("P-1", "2024-03-05", {{"pulido", std::nullopt}}));
    ASSERT_TRUE(out.accepted());
    EXPECT_EQ(out.cumulative_cost, Money{1200});
}

TEST_F(ServiceTest, SameDateRejectedWithoutPartialWrite) {
    add_plate("P-1");
    ASSERT_TRUE(svc().create_maintenance(submission("P-1", "2024-03-05")).accepted());
    auto before = journal_bytes();
    auto out = svc().create_maintenance(submission("P-1", "2024-03-05"));
    EXPECT_EQ(out.deny_code, "SAME_DATE");
    EXPECT_EQ(plate("P-1").cumulative_cost, Money{2000});
    EXPECT_EQ(journal_bytes(), before);
}

TEST_F(ServiceTest, CreateMaintenanceValidation) {
    add_plate("P-1");
    auto before = journal_bytes();
    auto s = submission("P-1", "2024-03-05");
    s.company_id = "EMP-99";
    EXPECT_EQ(svc().create_maintenance(s).deny_code, "UNKNOWN_COMPANY");
    EXPECT_EQ(svc().create_maintenance(submission("P-1", "2024-03-05", {{"soldar", 5}})).deny_code, "UNKNOWN_TASK");
    EXPECT_EQ(svc().create_maintenance(submission("P-1", "2024-03-05", {{"pulido", 5}}, {"oxidada"})).deny_code,
              "UNKNOWN_CONDITION");
    EXPECT_EQ(svc().create_maintenance(submission("P-1", "2024-03-05", {})).deny_code, "EMPTY_TASKS");
    EXPECT_EQ(svc().create_maintenance(submission("P-9", "2024-03-05")).deny_code, "NOT_FOUND");
    EXPECT_EQ(journal_bytes(), before);
}

TEST_F(ServiceTest, CriticalPointGatesPlate) {
    open(policy::default_policy(Money{3000}));
    add_plate("P-1");
    EXPECT_TRUE(svc().create_maintenance(submission("P-1", "2024-03-01")).accepted());  // 0 -> 2000
    EXPECT_TRUE(svc().create_maintenance(submission("P-1", "2024-03-02")).accepted());  // 2000 -> 4000
    EXPECT_EQ(svc().create_maintenance(submission("P-1", "2024-03-03")).deny_code, "CRITICAL_POINT");
}

TEST_F(ServiceTest, PandeadaExceptionAllowsSecondDailyMaintenance) {
    auto policy = policy::build_policy(std::string_view(
        R"({"type":"all_of","children":[{"type":"condition_exception","tag":"pandeada","child":{"type":"same_date"}},
            {"type":"critical_point","max_cost":100000}]})"));
    open(policy);
    add_plate("P-1");
    ASSERT_TRUE(svc().create_maintenance(submission("P-1", "2024-03-05", {{"pulido", 100}}, {"pandeada"})).accepted());
    EXPECT_TRUE(svc().create_maintenance(submission("P-1", "2024-03-05", {{"pulido", 100}}, {"pandeada"})).accepted());
    EXPECT_TRUE(svc().create_maintenance(submission("P-1", "2024-03-05", {{"pulido", 100}})).accepted());
    // last one cleared the tag, so same-date applies again
    EXPECT_EQ(svc().create_maintenance(submission("P-1", "2024-03-05", {{"pulido", 100}})).deny_code, "SAME_DATE");
}

TEST_F(ServiceTest, DeleteMaintenanceReversesCost) {
    add_plate("P-1");
    ASSERT_TRUE(svc().create_maintenance(submission("P-1", "2024-03-04", {{"pulido", 500}})).accepted());
    auto out = svc().create_maintenance(submission("P-1", "2024-03-05"));
    ASSERT_TRUE(out.accepted());
    EXPECT_EQ(plate("P-1").cumulative_cost, Money{2500});
    auto del = svc().delete_maintenance(*out.entity_id);
    EXPECT_TRUE(del.accepted());
    EXPECT_EQ(plate("P-1").cumulative_cost, Money{500});
    EXPECT_EQ(svc().delete_maintenance(*out.entity_id).deny_code, "NOT_FOUND");
    auto rows = svc().report_top_cost(10);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].cumulative_cost, Money{500});
    EXPECT_EQ(rows[0].maintenance_count, 1u);
    // a deleted same-day record no longer blocks
    EXPECT_TRUE(svc().create_maintenance(submission("P-1", "2024-03-05")).accepted());
}

TEST_F(ServiceTest, MaintenanceIdsNeverReused) {
    add_plate("P-1");
    auto a = svc().create_maintenance(submission("P-1", "2024-03-04"));
    svc().delete_maintenance(*a.entity_id);
    open();
    auto b = svc().create_maintenance(submission("P-1", "2024-03-05"));
    EXPECT_NE(a.entity_id, b.entity_id);
}

TEST_F(ServiceTest, TopCostTiesByPlateId) {
    for (auto id : {"A", "B", "C"}) add_plate(id);
    svc().create_maintenance(submission("A", "2024-03-01", {{"pulido", 5000}}));
    svc().create_maintenance(submission("C", "2024-03-01", {{"pulido", 7000}}));
    svc().create_maintenance(submission("B", "2024-03-01", {{"pulido", 3000}}));
    svc().create_maintenance(submission("B", "2024-03-02", {{"limpieza", 4000}}));
    auto rows = svc().report_top_cost(10);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].plate_id.str(), "B");
    EXPECT_EQ(rows[0].cumulative_cost, Money{7000});
    EXPECT_EQ(rows[0].maintenance_count, 2u);
    EXPECT_EQ(rows[1].plate_id.str(), "C");
    EXPECT_EQ(rows[2].plate_id.str(), "A");
    EXPECT_TRUE(svc().report_top_cost(0).empty());
    EXPECT_EQ(svc().report_top_cost(2).size(), 2u);
}

TEST_F(ServiceTest, TopCostEmptyStore) {
    add_plate("P-1");
    EXPECT_TRUE(svc().report_top_cost(10).empty());
}

TEST_F(ServiceTest, PeriodComparison) {
    for (auto id : {"P-1", "P-2"}) add_plate(id);
    svc().create_maintenance(submission("P-1", "2024-01-10", {{"pulido", 60000}}));
    svc().create_maintenance(submission("P-2", "2024-01-20", {{"pulido", 40000}}));
    svc().create_maintenance(submission("P-1", "2024-07-10", {{"pulido", 85000}}));
    auto r = svc().report_period_comparison(date("2024-01-01"), date("2024-06-30"), date("2024-07-01"),
                                            date("2024-12-31"));
    EXPECT_EQ(r.period_a_total, Money{100000});
    EXPECT_EQ(r.period_b_total, Money{85000});
    EXPECT_EQ(r.reduction_tenths, 150);  // 100 * 15000 / 100000

    auto same = svc().report_period_comparison(date("2024-01-01"), date("2024-06-30"), date("2024-01-01"),
                                               date("2024-06-30"));
    EXPECT_EQ(same.reduction_tenths, 0);

    auto zero = svc().report_period_comparison(date("2023-01-01"), date("2023-06-30"), date("2024-01-01"),
                                               date("2024-06-30"));
    EXPECT_TRUE(zero.zero_baseline());

    EXPECT_THROW(svc().report_period_comparison(date("2024-06-30"), date("2024-01-01"), date("2024-07-01"),
                                                date("2024-12-31")),
                 Error);
}

TEST(ReductionTenths, RoundsHalfAwayFromZero) {
    EXPECT_EQ(reduction_tenths(Money{100000}, Money{85000}), 150);
    EXPECT_EQ(reduction_tenths(Money{3}, Money{2}), 333);     // 33.33..
    EXPECT_EQ(reduction_tenths(Money{3}, Money{1}), 667);     // 66.66..
    EXPECT_EQ(reduction_tenths(Money{2000}, Money{1999}), 1); // 0.05 -> 0.1
    EXPECT_EQ(reduction_tenths(Money{100}, Money{150}), -500);
    EXPECT_EQ(reduction_tenths(Money{2000}, Money{2001}), -1);
    EXPECT_FALSE(reduction_tenths(Money{0}, Money{5}).has_value());
}

TEST_F(ServiceTest, RecommendReplacement) {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 30; ++i) add_plate("P-" + std::to_string(i));
    for (int i = 0; i < 60; ++i) {
        auto id = "P-" + std::to_string(rng() % 30);
        auto day = "2024-03-" + std::string(i % 28 + 1 < 10 ? "0" : "") + std::to_string(i % 28 + 1);
        svc().create_maintenance(submission(id, day.c_str(), {{"pulido", static_cast<std::int64_t>(rng() % 5) * 1000}}));
    }
    svc().decommission_plate("P-3");
    auto state = pktest::audit::load(dir_.path());
    for (std::int64_t threshold : {0, 1000, 2000, 4000, 1000000}) {
        std::vector<std::string> got;
        for (const auto& id : svc().recommend_replacement(Money{threshold})) got.push_back(id.str());
        EXPECT_EQ(got, pktest::audit::replacement(state, threshold)) << threshold;
    }
    EXPECT_EQ(svc().recommend_replacement(Money{0}).size(), 29u);  // every live non-decommissioned plate
    EXPECT_TRUE(svc().recommend_replacement(Money{1000000}).empty());
}

TEST_F(ServiceTest, ReportsNeverWrite) {
    add_plate("P-1");
    svc().create_maintenance(submission("P-1", "2024-03-05"));
    auto before = journal_bytes();
    svc().report_top_cost(5);
    svc().report_period_comparison(date("2024-01-01"), date("2024-12-31"), date("2024-01-01"), date("2024-12-31"));
    svc().recommend_replacement(Money{0});
    svc().plate_snapshot("P-1");
    EXPECT_EQ(journal_bytes(), before);
}

TEST_F(ServiceTest, SnapshotKeepsTenMostRecent) {
    add_plate("P-1");
    for (int d = 1; d <= 12; ++d) {
        auto day = "2024-03-" + std::string(d < 10 ? "0" : "") + std::to_string(d);
        ASSERT_TRUE(svc().create_maintenance(submission("P-1", day.c_str(), {{"pulido", d}})).accepted());
    }
    auto snap = svc().plate_snapshot("P-1");
    ASSERT_TRUE(snap);
    ASSERT_EQ(snap->recent.size(), 10u);
    // sort-and-truncate oracle over the full history
    auto all = svc().history("P-1");
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.timestamp > b.timestamp; });
    all.resize(10, all.front());
    EXPECT_EQ(snap->recent, all);
    EXPECT_EQ(snap->recent.front().date, date("2024-03-12"));
    EXPECT_FALSE(svc().plate_snapshot("P-404"));
}

// Randomized mixed command stream; afterwards every plate's cumulative cost
// matches the sum over live records, and a cold reopen reports identically.
TEST_F(ServiceTest, CostConservationAndReplayEquivalence) {
    std::mt19937_64 rng(2024);
    std::vector<std::string> maint_ids;
    int next_plate = 0;
    for (int step = 0; step < 600; ++step) {
        auto r = rng() % 10;
        auto some_plate = [&] { return "P-" + std::to_string(rng() % std::max(1, next_plate)); };
        if (r < 2 || next_plate == 0) {
            add_plate("P-" + std::to_string(next_plate++));
        } else if (r < 7) {
            auto day = "2024-03-" + std::string(1 + rng() % 9 < 10 ? "0" : "") + std::to_string(1 + rng() % 9);
            auto out = svc().create_maintenance(
                submission(some_plate(), day.c_str(), {{"pulido", static_cast<std::int64_t>(rng() % 4000)}}));
            if (out.accepted()) maint_ids.push_back(*out.entity_id);
        } else if (r < 9 && !maint_ids.empty()) {
            auto i = rng() % maint_ids.size();
            svc().delete_maintenance(maint_ids[i]);
            maint_ids.erase(maint_ids.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            svc().decommission_plate(some_plate());
        }
    }
    auto state = pktest::audit::load(dir_.path());
    EXPECT_TRUE(pktest::audit::cost_discrepancies(state).empty());
    auto before = svc().report_top_cost(1000);
    EXPECT_EQ(pktest::audit::as_rows(before), pktest::audit::top_cost(state, 1000));
    open();
    EXPECT_EQ(svc().report_top_cost(1000), before);
}
