#include "qax/incentive_sim.hpp"

#include "qax/adjudication.hpp"
#include "qax/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace qax::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

const AnswerSpec kTrialSpec = EnumeratedSpec{{"yes", "no"}};

struct PointAccumulator {
    std::uint64_t trials = 0;
    std::uint64_t correct = 0;
    std::int64_t seller_sum = 0;
    unsigned __int128 seller_sq_sum = 0;
    std::int64_t buyer_outflow_sum = 0;
    std::int64_t fee_sum = 0;
    std::int64_t sink_sum = 0;
    bool fee_invariant = true;
    bool conserved = true;

    void add(const TrialOutcome& o, bool correct_answer, Money expected_fee)
    {
        ++trials;
        correct += correct_answer ? 1 : 0;
        seller_sum += o.seller_net.minor();
        auto magnitude = static_cast<unsigned __int128>(std::abs(o.seller_net.minor()));
        seller_sq_sum += magnitude * magnitude;
        buyer_outflow_sum += -o.buyer_net.minor();
        fee_sum += o.fee_delta.minor();
        sink_sum += o.sink_delta.minor();
        fee_invariant = fee_invariant && o.fee_delta == expected_fee;
        conserved = conserved && o.conserved;
    }

    void merge(const PointAccumulator& other)
    {
        trials += other.trials;
        correct += other.correct;
        seller_sum += other.seller_sum;
        seller_sq_sum += other.seller_sq_sum;
        buyer_outflow_sum += other.buyer_outflow_sum;
        fee_sum += other.fee_sum;
        sink_sum += other.sink_sum;
        fee_invariant = fee_invariant && other.fee_invariant;
        conserved = conserved && other.conserved;
    }
};

void check_probability(double p)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw Error(ErrorCode::InvalidProbability, "accuracy must lie in [0, 1]");
}

} // namespace

double seller_expected_payoff(double accuracy, const Terms& terms)
{
    check_probability(accuracy);
    auto price = static_cast<double>(terms.price.minor());
    auto stake = static_cast<double>(terms.stake.minor());
    auto fee = static_cast<double>(terms.seller_fee.minor());
    return accuracy * price - (1.0 - accuracy) * stake - fee;
}

double break_even_accuracy(const Terms& terms)
{
    auto numerator = static_cast<double>((terms.stake + terms.seller_fee).minor());
    auto denominator = static_cast<double>((terms.price + terms.stake).minor());
    return numerator / denominator;
}

bool seller_participates(const SellerStrategy& seller, const Terms& terms)
{
    return seller_expected_payoff(seller.accuracy, terms) > 0.0;
}

bool buyer_should_verify(const BuyerStrategy& buyer, const Terms& terms)
{
    return buyer.evidence_cost < terms.deposit;
}

TrialOutcome run_trial(const Terms& terms, bool answer_correct, bool buyer_verifies)
{
    Ledger ledger;
    Protocol protocol(ledger);
    AccountId buyer_account = ledger.open_account(AccountKind::Buyer, "buyer");
    AccountId seller_account = ledger.open_account(AccountKind::Seller, "seller");
    Money buyer_funding = terms.price + terms.deposit + terms.buyer_fee;
    Money seller_funding = terms.stake + terms.seller_fee;
    ledger.fund(buyer_account, buyer_funding);
    ledger.fund(seller_account, seller_funding);

    Transaction t = protocol.create_question("trial", {"buyer", buyer_account}, "trial question", kTrialSpec, terms);
    t = protocol.post_question(std::move(t));
    t = protocol.accept_question(std::move(t), {"seller", seller_account}, terms.answer_deadline);
    t = protocol.submit_answer(std::move(t), "seller", answer_correct ? "yes" : "no", terms.answer_deadline);
    if (buyer_verifies) {
        t = protocol.submit_evidence(std::move(t), "buyer", make_attestation("yes", "observed outcome"),
                                     terms.evidence_deadline);
        Decision decision = auto_verdict(t.spec, *t.answer, *t.evidence, kAttestationSchemaV1);
        t = protocol.adjudicate(std::move(t), decision.verdict);
    } else {
        t = Protocol::advance_time(std::move(t), terms.evidence_deadline + 1);
    }
    SettlementPath path = *settlement_path(t);
    t = protocol.settle(std::move(t));

    TrialOutcome outcome;
    outcome.path = path;
    outcome.seller_net = ledger.balance_of(seller_account) - seller_funding;
    outcome.buyer_net = ledger.balance_of(buyer_account) - buyer_funding;
    outcome.fee_delta = ledger.balance_of(protocol.fee_account());
    outcome.sink_delta = ledger.balance_of(protocol.sink_account());
    outcome.conserved = ledger.total_supply() == ledger.total_issued() && ledger.balance_of(t.escrow) == Money{};
    return outcome;
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t point, std::uint64_t trial)
{
    return splitmix64(splitmix64(seed ^ splitmix64(point)) ^ trial);
}

double unit_draw(std::uint64_t seed)
{
    return static_cast<double>(splitmix64(seed) >> 11) * 0x1.0p-53;
}

SimReport run_simulation(const SimConfig& config)
{
    if (config.grid.empty())
        throw Error(ErrorCode::InvalidConfig, "grid is empty");
    for (double p : config.grid)
        if (!(p >= 0.0 && p <= 1.0))
            throw Error(ErrorCode::InvalidConfig, "grid values must lie in [0, 1]");
    if (config.trials == 0)
        throw Error(ErrorCode::InvalidConfig, "trials must be positive");
    if (config.buyer.evidence_cost < Money{})
        throw Error(ErrorCode::InvalidConfig, "evidence cost must be non-negative");
    if (auto violation = terms_violation(config.terms))
        throw Error(ErrorCode::InvalidConfig, *violation);

    const Terms& terms = config.terms;
    const bool verifies = buyer_should_verify(config.buyer, terms);
    const Money expected_fee = terms.buyer_fee + terms.seller_fee;
    const std::size_t n_points = config.grid.size();

    unsigned threads = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, config.trials));

    std::vector<PointAccumulator> totals(n_points);
    for (std::size_t point = 0; point < n_points; ++point) {
        std::vector<PointAccumulator> partial(threads);
        std::vector<std::thread> workers;
        for (unsigned w = 0; w < threads; ++w) {
            workers.emplace_back([&, w, point] {
                std::uint64_t begin = config.trials * w / threads;
                std::uint64_t end = config.trials * (w + 1) / threads;
                for (std::uint64_t trial = begin; trial < end; ++trial) {
                    bool correct = unit_draw(trial_seed(config.seed, point, trial)) < config.grid[point];
                    partial[w].add(run_trial(terms, correct, verifies), correct, expected_fee);
                }
            });
        }
        for (auto& worker : workers)
            worker.join();
        for (const auto& p : partial)
            totals[point].merge(p);
    }

    SimReport report;
    report.config = config;
    report.buyer_verifies = verifies;
    report.break_even_closed_form = break_even_accuracy(terms);
    for (std::size_t point = 0; point < n_points; ++point) {
        const auto& acc = totals[point];
        auto n = static_cast<double>(acc.trials);
        GridPoint g;
        g.accuracy = config.grid[point];
        g.seller_participates = seller_participates({g.accuracy}, terms);
        g.trials = acc.trials;
        g.correct = acc.correct;
        g.mean_seller_payoff = static_cast<double>(acc.seller_sum) / n;
        double mean_sq = static_cast<double>(acc.seller_sq_sum) / n;
        double variance = acc.trials > 1 ? std::max(0.0, mean_sq - g.mean_seller_payoff * g.mean_seller_payoff) * n / (n - 1)
                                         : 0.0;
        g.seller_payoff_stderr = std::sqrt(variance / n);
        g.closed_form_payoff = seller_expected_payoff(g.accuracy, terms);
        g.mean_buyer_outflow = static_cast<double>(acc.buyer_outflow_sum) / n;
        g.mean_buyer_cost = g.mean_buyer_outflow + (verifies ? static_cast<double>(config.buyer.evidence_cost.minor()) : 0.0);
        g.exchange_revenue = acc.fee_sum;
        g.exchange_revenue_per_transaction = static_cast<double>(acc.fee_sum) / n;
        g.sink_absorption = acc.sink_sum;
        g.mean_sink_absorption = static_cast<double>(acc.sink_sum) / n;
        g.fee_invariant = acc.fee_invariant;
        g.conserved = acc.conserved;
        report.points.push_back(g);
    }

    std::vector<std::size_t> order(n_points);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return report.points[a].accuracy < report.points[b].accuracy; });
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& cur = report.points[order[i]];
        if (cur.mean_seller_payoff == 0.0) {
            report.break_even_estimate = cur.accuracy;
            break;
        }
        if (i + 1 == order.size())
            break;
        const auto& next = report.points[order[i + 1]];
        if (cur.mean_seller_payoff < 0.0 && next.mean_seller_payoff > 0.0) {
            double frac = -cur.mean_seller_payoff / (next.mean_seller_payoff - cur.mean_seller_payoff);
            report.break_even_estimate = cur.accuracy + frac * (next.accuracy - cur.accuracy);
            break;
        }
    }
    return report;
}

nlohmann::json report_to_json(const SimReport& report)
{
    nlohmann::json points = nlohmann::json::array();
    for (const auto& g : report.points)
        points.push_back({
            {"accuracy", g.accuracy},
            {"seller_participates", g.seller_participates},
            {"trials", g.trials},
            {"correct", g.correct},
            {"mean_seller_payoff", g.mean_seller_payoff},
            {"seller_payoff_stderr", g.seller_payoff_stderr},
            {"closed_form_payoff", g.closed_form_payoff},
            {"mean_buyer_outflow", g.mean_buyer_outflow},
            {"mean_buyer_cost", g.mean_buyer_cost},
            {"exchange_revenue", g.exchange_revenue},
            {"exchange_revenue_per_transaction", g.exchange_revenue_per_transaction},
            {"sink_absorption", g.sink_absorption},
            {"mean_sink_absorption", g.mean_sink_absorption},
            {"fee_invariant", g.fee_invariant},
            {"conserved", g.conserved},
        });
    return {
        {"terms", terms_to_json(report.config.terms)},
        {"trials", report.config.trials},
        {"seed", report.config.seed},
        {"evidence_cost", report.config.buyer.evidence_cost.minor()},
        {"buyer_verifies", report.buyer_verifies},
        {"points", points},
        {"break_even_closed_form", report.break_even_closed_form},
        {"break_even_estimate",
         report.break_even_estimate ? nlohmann::json(*report.break_even_estimate) : nlohmann::json(nullptr)},
    };
}

} // namespace qax::sim
