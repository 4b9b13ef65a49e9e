#include "qax/demo.hpp"

#include "qax/adjudication.hpp"
#include "qax/error.hpp"
#include "qax/exchange.hpp"

#include <iomanip>
#include <map>

namespace qax {

namespace {

constexpr Timestamp kStart = 1767225600; // 2026-01-01T00:00:00Z
constexpr Timestamp kDay = 86400;
constexpr const char* kAdminToken = "demo-admin";

struct Party {
    std::string pseudonym;
    std::string credential;
    std::string buyer_account;
    std::string seller_account;
};

struct Question {
    std::string text;
    nlohmann::json spec;
    std::string seller; // key into the seller table
    std::string answer;
    std::optional<std::string> evidence;
    bool manual = false;
    std::string ruling;
    std::string rationale;
};

class Client {
public:
    explicit Client(Exchange& exchange) : exchange_(exchange) {}

    nlohmann::json call(const std::string& method, const std::string& path, const std::optional<std::string>& credential,
                        const nlohmann::json& body = nlohmann::json::object())
    {
        Response r = exchange_.route_request({method, path, credential, body.dump()});
        if (r.status >= 300)
            throw Error(ErrorCode::BadRequest, method + " " + path + " -> " + std::to_string(r.status) + " " +
                                                   r.body.dump());
        return r.body;
    }

    Party enroll(const std::vector<std::string>& capabilities)
    {
        auto r = call("POST", "/register", std::nullopt, {{"capabilities", capabilities}});
        return Party{r.at("pseudonym"), r.at("credential"), r.at("accounts").value("buyer", ""),
                     r.at("accounts").value("seller", "")};
    }

private:
    Exchange& exchange_;
};

} // namespace

std::string format_dollars(Money amount)
{
    std::int64_t v = amount.minor();
    std::string sign = v < 0 ? "-" : "";
    std::uint64_t mag = v < 0 ? 0 - static_cast<std::uint64_t>(v) : static_cast<std::uint64_t>(v);
    std::string whole = std::to_string(mag / 100);
    for (int i = static_cast<int>(whole.size()) - 3; i > 0; i -= 3)
        whole.insert(static_cast<std::size_t>(i), ",");
    std::string cents = std::to_string(mag % 100);
    if (cents.size() < 2)
        cents.insert(0, "0");
    return sign + "$" + whole + "." + cents;
}

DemoSummary run_demo(std::ostream& out, const std::optional<std::filesystem::path>& log_path)
{
    ExchangeOptions options;
    options.admin_token = kAdminToken;
    options.start_time = kStart;
    options.clock = ClockMode::Simulated;
    std::unique_ptr<Exchange> exchange;
    if (log_path) {
        std::filesystem::remove(*log_path);
        exchange = Exchange::open(options, *log_path);
    } else {
        exchange = std::make_unique<Exchange>(options);
    }
    Client api(*exchange);
    const std::optional<std::string> admin = kAdminToken;

    const nlohmann::json terms{
        {"price_P", 200000}, {"stake_S", 100000}, {"deposit_D", 40000}, {"fee_Q", 5000}, {"fee_A", 5000},
        {"answer_deadline", kStart + 3 * kDay}, {"evidence_deadline", kStart + 10 * kDay},
    };
    const std::vector<Question> questions{
        {"Which compound binds target KX-1 with Kd below 100 nM?",
         {{"variant", "Enumerated"}, {"options", {"compound-17", "compound-42", "none"}}},
         "s1", "compound-17", make_attestation("compound-17", "SPR assay, Kd 40 nM"), false, "", ""},
        {"How many of the 12 published screening hits replicate in an orthogonal assay?",
         {{"variant", "IntegerRange"}, {"lo", 0}, {"hi", 12}},
         "s2", "3", make_attestation("3", "orthogonal assay, 3 of 12 active"), false, "", ""},
        {"What is the IC50 of compound-42 in HEK293 cells, in micromolar?",
         {{"variant", "DecimalRange"}, {"lo", "0.00"}, {"hi", "100.00"}, {"scale", 2}},
         "s3", "12.5", make_attestation("40.00", "dose-response, 8 points"), false, "", ""},
        {"Does the reported effect survive a preregistered replication at n=200?",
         {{"variant", "Enumerated"}, {"options", {"yes", "no"}}},
         "s1", "yes", std::string("lab notebook photo, pages 3-4"), true, "InsufficientEvidence",
         "notebook pages do not show the preregistered analysis"},
        {"Is the binding site allosteric or orthosteric?",
         {{"variant", "Enumerated"}, {"options", {"allosteric", "orthosteric"}}},
         "s2", "cryptic", std::nullopt, false, "", ""},
    };

    Party buyer = api.enroll({"buy"});
    std::map<std::string, Party> sellers{{"s1", api.enroll({"sell"})}, {"s2", api.enroll({"sell"})},
                                         {"s3", api.enroll({"sell"})}};
    Party arbiter = api.enroll({"arbitrate"});

    const Money per_question{200000 + 40000 + 5000};
    const Money buyer_funding{per_question.minor() * static_cast<std::int64_t>(questions.size())};
    api.call("POST", "/admin/fund", admin, {{"pseudonym", buyer.pseudonym}, {"role", "buyer"}, {"amount", buyer_funding.minor()}});
    std::map<std::string, Money> seller_funding;
    for (const auto& q : questions)
        seller_funding[q.seller] += Money{100000 + 5000};
    for (const auto& [key, amount] : seller_funding)
        api.call("POST", "/admin/fund", admin,
                 {{"pseudonym", sellers.at(key).pseudonym}, {"role", "seller"}, {"amount", amount.minor()}});

    auto tick_to_day = [&](std::int64_t day) {
        api.call("POST", "/admin/tick", admin, {{"now", kStart + day * kDay}});
    };

    // Day 0: the buyer drafts and posts every question.
    std::vector<std::string> ids;
    for (const auto& q : questions) {
        nlohmann::json body{{"question_text", q.text}, {"spec", q.spec}, {"terms", terms}};
        if (q.manual)
            body["policy"] = {{"kind", "ManualRuling"}, {"arbiter", arbiter.pseudonym}};
        auto created = api.call("POST", "/questions", buyer.credential, body);
        ids.push_back(created.at("id"));
        api.call("POST", "/questions/" + ids.back() + "/post", buyer.credential);
    }

    // Day 1: sellers stake and answer.
    tick_to_day(1);
    for (std::size_t i = 0; i < questions.size(); ++i) {
        const auto& seller = sellers.at(questions[i].seller);
        api.call("POST", "/questions/" + ids[i] + "/accept", seller.credential);
        api.call("POST", "/questions/" + ids[i] + "/answer", seller.credential, {{"answer", questions[i].answer}});
    }

    // Day 7: the buyer has run its experiments and files evidence.
    for (std::int64_t day = 2; day <= 7; ++day)
        tick_to_day(day);
    for (std::size_t i = 0; i < questions.size(); ++i)
        if (questions[i].evidence)
            api.call("POST", "/questions/" + ids[i] + "/evidence", buyer.credential, {{"body", *questions[i].evidence}});

    // Day 8: adjudication.
    tick_to_day(8);
    for (std::size_t i = 0; i < questions.size(); ++i) {
        if (!questions[i].evidence)
            continue;
        if (questions[i].manual)
            api.call("POST", "/questions/" + ids[i] + "/adjudicate", arbiter.credential,
                     {{"verdict", questions[i].ruling}, {"rationale", questions[i].rationale}});
        else
            api.call("POST", "/questions/" + ids[i] + "/adjudicate", buyer.credential);
    }

    // Day 10: evidence deadline; everything settles.
    tick_to_day(9);
    tick_to_day(10);
    for (const auto& id : ids)
        api.call("POST", "/questions/" + id + "/settle", buyer.credential);

    DemoSummary summary;
    summary.days = (exchange->now() - kStart) / kDay;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto view = api.call("GET", "/questions/" + ids[i], buyer.credential);
        DemoRow row;
        row.id = ids[i];
        row.question = questions[i].text;
        row.answer = questions[i].answer;
        row.path = view.at("settled_from").get<std::string>();
        if (row.path == "Adjudicated")
            row.path += "(" + view.at("verdict").get<std::string>() + ")";
        for (const auto& e : view.at("entries")) {
            Money amount{e.at("amount").get<std::int64_t>()};
            const auto& from = e.at("from").get_ref<const std::string&>();
            const auto& to = e.at("to").get_ref<const std::string&>();
            if (from == "buyer")
                row.buyer_outflow += amount;
            if (to == "buyer")
                row.buyer_outflow -= amount;
            if (from == "seller")
                row.seller_net -= amount;
            if (to == "seller")
                row.seller_net += amount;
            if (to == "exchange_fee")
                row.fees += amount;
            if (from == "exchange_fee")
                row.fees -= amount;
            if (to == "sink")
                row.sink += amount;
        }
        summary.buyer_outflow += row.buyer_outflow;
        summary.seller_net += row.seller_net;
        summary.fees += row.fees;
        summary.sink += row.sink;
        summary.rows.push_back(row);
    }

    // Reconcile the summary against the ledger.
    auto check = [&](const std::string& what, Money expected, Money actual) {
        if (expected != actual)
            summary.mismatches.push_back(what + ": summary " + std::to_string(expected.minor()) + ", ledger " +
                                         std::to_string(actual.minor()));
    };
    auto balance = [&](const std::string& account, const std::optional<std::string>& credential) {
        return Money{api.call("GET", "/accounts/" + account, credential).at("balance").get<std::int64_t>()};
    };
    check("buyer balance", buyer_funding - summary.buyer_outflow, balance(buyer.buyer_account, buyer.credential));
    for (const auto& [key, seller] : sellers) {
        Money net;
        for (std::size_t i = 0; i < questions.size(); ++i)
            if (questions[i].seller == key)
                net += summary.rows[i].seller_net;
        check("seller " + key + " balance", seller_funding[key] + net, balance(seller.seller_account, seller.credential));
    }
    check("exchange fee account", summary.fees, balance(exchange->fee_account()->value, admin));
    check("sink account", summary.sink, balance(exchange->sink_account()->value, admin));
    for (const auto& id : ids)
        check("escrow " + id, Money{}, balance(exchange->transaction(id)->escrow.value, admin));
    check("total supply", exchange->total_issued(), exchange->total_supply());
    check("flows balance", summary.buyer_outflow, summary.seller_net + summary.fees + summary.sink);

    out << "Ten-day question campaign: " << questions.size() << " questions at "
        << format_dollars(Money{200000}) << " each, evidence deadline day 10\n\n";
    out << std::left << std::setw(6) << "id" << std::setw(34) << "settlement" << std::right << std::setw(14)
        << "buyer paid" << std::setw(14) << "seller net" << std::setw(12) << "fees" << std::setw(14) << "sink"
        << "\n";
    for (const auto& row : summary.rows)
        out << std::left << std::setw(6) << row.id << std::setw(34) << row.path << std::right << std::setw(14)
            << format_dollars(row.buyer_outflow) << std::setw(14) << format_dollars(row.seller_net) << std::setw(12)
            << format_dollars(row.fees) << std::setw(14) << format_dollars(row.sink) << "\n";
    out << std::left << std::setw(40) << "total" << std::right << std::setw(14) << format_dollars(summary.buyer_outflow)
        << std::setw(14) << format_dollars(summary.seller_net) << std::setw(12) << format_dollars(summary.fees)
        << std::setw(14) << format_dollars(summary.sink) << "\n\n";
    out << "Buyer spent " << format_dollars(summary.buyer_outflow) << " over " << summary.days << " days.\n";
    if (summary.reconciled()) {
        out << "Reconciliation: OK (every total matches the ledger to the cent; total supply "
            << format_dollars(exchange->total_supply()) << ")\n";
    } else {
        out << "Reconciliation: FAILED\n";
        for (const auto& m : summary.mismatches)
            out << "  " << m << "\n";
    }
    return summary;
}

} // namespace qax
