#pragma once

// Maintenance restriction policies: leaf strategies, combinators, and the
// config-driven factory that builds immutable trees from JSON.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "platekeeper/domain.hpp"

namespace platekeeper::policy {

using json = nlohmann::json;

inline constexpr std::size_t kMaxDepth = 16;

namespace deny_code {
inline constexpr const char* kSameDate = "SAME_DATE";
inline constexpr const char* kCriticalPoint = "CRITICAL_POINT";
inline constexpr const char* kConditionBlocked = "CONDITION_BLOCKED";
}  // namespace deny_code

/// Everything a rule may look at. History holds the plate's live records,
/// oldest first, and never includes the proposal itself.
struct EvaluationContext {
    const Plate& plate;
    const MaintenanceRecord& proposal;
    std::span<const MaintenanceRecord> history;
};

struct Verdict {
    enum class Outcome { Allow, Deny };

    Outcome outcome = Outcome::Allow;
    std::optional<std::string> deny_code;
    std::optional<std::string> message;

    static Verdict allow() { return {}; }
    static Verdict deny(std::string code, std::string message) {
        return {Outcome::Deny, std::move(code), std::move(message)};
    }

    bool allowed() const { return outcome == Outcome::Allow; }

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

// ---------------------------------------------------------------------------
// Leaf rules

inline Verdict eval_same_date(const EvaluationContext& ctx) {
    for (const auto& rec : ctx.history) {
        if (rec.date == ctx.proposal.date) {
            return Verdict::deny(deny_code::kSameDate, "plate " + ctx.plate.id.str() +
                                                           " already has a maintenance on " +
                                                           ctx.proposal.date.to_string());
        }
    }
    return Verdict::allow();
}

// Gates on the plate's existing cost only; the proposal's cost is not added.
inline Verdict eval_critical_point(Money max_cost, const EvaluationContext& ctx) {
    if (ctx.plate.cumulative_cost >= max_cost) {
        return Verdict::deny(deny_code::kCriticalPoint,
                             "plate " + ctx.plate.id.str() + " reached its critical point (" +
                                 std::to_string(ctx.plate.cumulative_cost.amount()) + " >= " +
                                 std::to_string(max_cost.amount()) + ")");
    }
    return Verdict::allow();
}

inline Verdict eval_condition_block(const std::string& tag, const EvaluationContext& ctx) {
    if (ctx.plate.conditions.count(tag) != 0) {
        return Verdict::deny(deny_code::kConditionBlocked,
                             "plate " + ctx.plate.id.str() + " is tagged '" + tag + "' and cannot be maintained");
    }
    return Verdict::allow();
}

// ---------------------------------------------------------------------------
// Node hierarchy

class PolicyNode;
using NodePtr = std::shared_ptr<const PolicyNode>;

class PolicyNode {
public:
    virtual ~PolicyNode() = default;

    virtual Verdict evaluate(const EvaluationContext& ctx) const = 0;
    virtual json to_json() const = 0;
    virtual std::size_t depth() const { return 1; }
};

class SameDate final : public PolicyNode {
public:
    Verdict evaluate(const EvaluationContext& ctx) const override { return eval_same_date(ctx); }
    json to_json() const override { return json{{"type", "same_date"}}; }
};

class CriticalPoint final : public PolicyNode {
public:
    explicit CriticalPoint(Money max_cost) : max_cost_(max_cost) {}

    Verdict evaluate(const EvaluationContext& ctx) const override { return eval_critical_point(max_cost_, ctx); }
    json to_json() const override { return json{{"type", "critical_point"}, {"max_cost", max_cost_.amount()}}; }
    Money max_cost() const { return max_cost_; }

private:
    Money max_cost_;
};

class ConditionBlock final : public PolicyNode {
public:
    explicit ConditionBlock(std::string tag) : tag_(std::move(tag)) {}

    Verdict evaluate(const EvaluationContext& ctx) const override { return eval_condition_block(tag_, ctx); }
    json to_json() const override { return json{{"type", "condition_block"}, {"tag", tag_}}; }

private:
    std::string tag_;
};

/// Lets plates carrying `tag` bypass the wrapped policy entirely.
class ConditionException final : public PolicyNode {
public:
    ConditionException(std::string tag, NodePtr child) : tag_(std::move(tag)), child_(std::move(child)) {
        if (!child_) throw Error(ErrorCode::SchemaViolation, "condition_exception needs a child");
        if (child_->depth() + 1 > kMaxDepth) throw Error(ErrorCode::DepthExceeded, "policy tree deeper than 16");
    }

    Verdict evaluate(const EvaluationContext& ctx) const override {
        if (ctx.plate.conditions.count(tag_) != 0) return Verdict::allow();
        return child_->evaluate(ctx);
    }
    json to_json() const override {
        return json{{"type", "condition_exception"}, {"tag", tag_}, {"child", child_->to_json()}};
    }
    std::size_t depth() const override { return child_->depth() + 1; }

private:
    std::string tag_;
    NodePtr child_;
};

class Composite : public PolicyNode {
public:
    std::size_t depth() const override { return depth_; }
    const std::vector<NodePtr>& children() const { return children_; }

protected:
    Composite(const char* type, std::vector<NodePtr> children) : type_(type), children_(std::move(children)) {
        if (children_.empty()) {
            throw Error(ErrorCode::EmptyComposite, std::string(type_) + " needs at least one child");
        }
        std::size_t deepest = 0;
        for (const auto& c : children_) {
            if (!c) throw Error(ErrorCode::SchemaViolation, std::string(type_) + " has a null child");
            deepest = std::max(deepest, c->depth());
        }
        depth_ = deepest + 1;
        if (depth_ > kMaxDepth) throw Error(ErrorCode::DepthExceeded, "policy tree deeper than 16");
    }

    json children_json() const {
        json arr = json::array();
        for (const auto& c : children_) arr.push_back(c->to_json());
        return json{{"type", type_}, {"children", std::move(arr)}};
    }

private:
    const char* type_;
    std::vector<NodePtr> children_;
    std::size_t depth_ = 1;
};

/// Deny-overrides: the first denying child (in list order) decides.
class AllOf final : public Composite {
public:
    explicit AllOf(std::vector<NodePtr> children) : Composite("all_of", std::move(children)) {}

    Verdict evaluate(const EvaluationContext& ctx) const override {
        for (const auto& c : children()) {
            auto v = c->evaluate(ctx);
            if (!v.allowed()) return v;
        }
        return Verdict::allow();
    }
    json to_json() const override { return children_json(); }
};

/// Allow-overrides: any allowing child allows; otherwise the first child's denial is reported.
class AnyOf final : public Composite {
public:
    explicit AnyOf(std::vector<NodePtr> children) : Composite("any_of", std::move(children)) {}

    Verdict evaluate(const EvaluationContext& ctx) const override {
        std::optional<Verdict> first;
        for (const auto& c : children()) {
            auto v = c->evaluate(ctx);
            if (v.allowed()) return v;
            if (!first) first = std::move(v);
        }
        return *first;
    }
    json to_json() const override { return children_json(); }
};

inline Verdict evaluate(const PolicyNode& node, const EvaluationContext& ctx) { return node.evaluate(ctx); }

// ---------------------------------------------------------------------------
// Factory

/// Process-wide table of node constructors keyed by config "type". Built once
/// on first use and read-only afterwards.
class PolicyFactory {
public:
    using Recurse = std::function<NodePtr(const json&)>;
    using Builder = std::function<NodePtr(const json&, const Recurse&)>;

    static const PolicyFactory& instance() {
        static const PolicyFactory factory;
        return factory;
    }

    PolicyFactory(const PolicyFactory&) = delete;
    PolicyFactory& operator=(const PolicyFactory&) = delete;

    NodePtr build(const json& config) const { return build_at(config, 1, "$"); }

    bool knows(const std::string& type) const { return builders_.count(type) != 0; }

private:
    PolicyFactory() {
        builders_["same_date"] = [](const json& j, const Recurse&) -> NodePtr {
            expect_fields(j, {"type"});
            return std::make_shared<SameDate>();
        };
        builders_["critical_point"] = [](const json& j, const Recurse&) -> NodePtr {
            expect_fields(j, {"type", "max_cost"});
            const auto& v = j.at("max_cost");
            if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
                throw Error(ErrorCode::SchemaViolation, "max_cost must be a non-negative integer");
            }
            return std::make_shared<CriticalPoint>(Money{v.get<std::int64_t>()});
        };
        builders_["condition_block"] = [](const json& j, const Recurse&) -> NodePtr {
            expect_fields(j, {"type", "tag"});
            return std::make_shared<ConditionBlock>(tag_of(j));
        };
        builders_["condition_exception"] = [](const json& j, const Recurse& recurse) -> NodePtr {
            expect_fields(j, {"type", "tag", "child"});
            return std::make_shared<ConditionException>(tag_of(j), recurse(j.at("child")));
        };
        builders_["all_of"] = [](const json& j, const Recurse& recurse) -> NodePtr {
            return std::make_shared<AllOf>(children_of(j, recurse));
        };
        builders_["any_of"] = [](const json& j, const Recurse& recurse) -> NodePtr {
            return std::make_shared<AnyOf>(children_of(j, recurse));
        };
    }

    NodePtr build_at(const json& config, std::size_t depth, const std::string& path) const {
        if (depth > kMaxDepth) throw Error(ErrorCode::DepthExceeded, "policy tree deeper than 16 at " + path);
        if (!config.is_object()) throw Error(ErrorCode::SchemaViolation, "policy node at " + path + " is not an object");
        auto type_it = config.find("type");
        if (type_it == config.end() || !type_it->is_string()) {
            throw Error(ErrorCode::SchemaViolation, "policy node at " + path + " has no string 'type'");
        }
        auto type = type_it->get<std::string>();
        auto it = builders_.find(type);
        if (it == builders_.end()) {
            throw Error(ErrorCode::UnknownPolicyType, "unknown policy type '" + type + "' at " + path);
        }
        std::size_t child_index = 0;
        Recurse recurse = [&](const json& child) {
            auto child_path = type == "condition_exception" ? path + ".child"
                                                            : path + ".children[" + std::to_string(child_index++) + "]";
            return build_at(child, depth + 1, child_path);
        };
        try {
            return it->second(config, recurse);
        } catch (const Error& e) {
            if (std::string_view(e.what()).find(" at $") == std::string_view::npos) {
                throw Error(e.code(), std::string(e.what()) + " at " + path);
            }
            throw;
        }
    }

    static void expect_fields(const json& j, std::initializer_list<const char*> allowed) {
        for (const auto& [key, _] : j.items()) {
            if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) ==
                allowed.end()) {
                throw Error(ErrorCode::SchemaViolation, "unexpected field '" + key + "'");
            }
        }
        for (const char* a : allowed) {
            if (!j.contains(a)) throw Error(ErrorCode::SchemaViolation, std::string("missing field '") + a + "'");
        }
    }

    static std::string tag_of(const json& j) {
        const auto& t = j.at("tag");
        if (!t.is_string() || !is_catalog_code(t.get<std::string>())) {
            throw Error(ErrorCode::SchemaViolation, "tag must be a lowercase condition code");
        }
        return t.get<std::string>();
    }

    static std::vector<NodePtr> children_of(const json& j, const Recurse& recurse) {
        expect_fields(j, {"type", "children"});
        const auto& arr = j.at("children");
        if (!arr.is_array()) throw Error(ErrorCode::SchemaViolation, "children must be an array");
        if (arr.empty()) throw Error(ErrorCode::EmptyComposite, j.at("type").get<std::string>() + " needs at least one child");
        std::vector<NodePtr> out;
        out.reserve(arr.size());
        for (const auto& c : arr) out.push_back(recurse(c));
        return out;
    }

    std::map<std::string, Builder> builders_;
};

inline NodePtr build_policy(const json& config) { return PolicyFactory::instance().build(config); }

inline NodePtr build_policy(std::string_view text) {
    json parsed;
    try {
        parsed = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaViolation, std::string("policy config is not valid JSON: ") + e.what());
    }
    return build_policy(parsed);
}

inline json serialize(const PolicyNode& node) { return node.to_json(); }

/// Same-date and critical-point restrictions applied together.
inline NodePtr default_policy(Money critical_point) {
    return std::make_shared<AllOf>(
        std::vector<NodePtr>{std::make_shared<SameDate>(), std::make_shared<CriticalPoint>(critical_point)});
}

}  // namespace platekeeper::policy
