#include "lifecycle.hpp"
#include "support.hpp"

#include "qax/digest.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <random>
#include <set>

using namespace qax;
using qax::test::Bench;
using qax::test::net_for;
using qax::test::reference_terms;
using qax::test::Op;
using qax::test::kAllOps;
using qax::test::apply_op;
using qax::test::allowed;

namespace {

struct Exact {
    Ledger ledger;
    Protocol protocol{ledger};
    Participant buyer{"b", ledger.open_account(AccountKind::Buyer)};
    Participant seller{"s", ledger.open_account(AccountKind::Seller)};
};

} // namespace

TEST(CreateQuestion, Examples)
{
    Bench b(reference_terms());
    auto t = b.draft();
    EXPECT_EQ(t.state, TxState::Draft);
    EXPECT_FALSE(t.seller);
    EXPECT_EQ(b.ledger.balance_of(t.escrow), Money{0});

    auto no_deposit = reference_terms();
    no_deposit.deposit = Money{0};
    EXPECT_QAX_ERROR(b.protocol.create_question("x", b.buyer, "q", test::binding_spec(), no_deposit),
                     ErrorCode::InvalidTerms);
    auto swapped = reference_terms();
    swapped.answer_deadline = swapped.evidence_deadline + 1;
    EXPECT_QAX_ERROR(b.protocol.create_question("x", b.buyer, "q", test::binding_spec(), swapped),
                     ErrorCode::InvalidTerms);
    EXPECT_QAX_ERROR(b.protocol.create_question("x", b.buyer, "q", EnumeratedSpec{{"only"}}, reference_terms()),
                     ErrorCode::InvalidSpec);
}

TEST(TermsInvariants, EachField)
{
    auto base = reference_terms();
    EXPECT_FALSE(terms_violation(base));
    for (auto field : {&Terms::price, &Terms::stake, &Terms::deposit}) {
        auto t = base;
        t.*field = Money{0};
        EXPECT_TRUE(terms_violation(t));
    }
    auto fees = base;
    fees.buyer_fee = Money{0};
    fees.seller_fee = Money{0};
    EXPECT_FALSE(terms_violation(fees));
    fees.seller_fee = Money{-1};
    EXPECT_TRUE(terms_violation(fees));
    auto same = base;
    same.evidence_deadline = same.answer_deadline;
    EXPECT_TRUE(terms_violation(same));
}

TEST(PostQuestion, MovesExactlyThePostingEntries)
{
    Exact x;
    x.ledger.fund(x.buyer.account, Money{245000});
    auto t = x.protocol.create_question("q", x.buyer, "?", test::binding_spec(), reference_terms());
    t = x.protocol.post_question(t);
    EXPECT_EQ(t.state, TxState::Posted);
    auto oracle = test::oracle_balances(x.ledger.journal());
    EXPECT_EQ(test::oracle_get(oracle, t.escrow), 240000);
    EXPECT_EQ(test::oracle_get(oracle, x.protocol.fee_account()), 5000);
    EXPECT_EQ(test::oracle_get(oracle, x.buyer.account), 0);
    EXPECT_EQ(x.ledger.balance_of(t.escrow), Money{240000});
    EXPECT_QAX_ERROR(x.protocol.post_question(t), ErrorCode::WrongState);
}

TEST(PostQuestion, ShortByOneCentLeavesNoTrace)
{
    Exact x;
    x.ledger.fund(x.buyer.account, Money{244999});
    auto t = x.protocol.create_question("q", x.buyer, "?", test::binding_spec(), reference_terms());
    auto before = x.ledger.journal().size();
    EXPECT_QAX_ERROR(x.protocol.post_question(t), ErrorCode::InsufficientFunds);
    EXPECT_EQ(x.ledger.journal().size(), before);
    EXPECT_EQ(x.ledger.balance_of(x.buyer.account), Money{244999});
}

TEST(AcceptQuestion, Examples)
{
    Bench b(reference_terms());
    auto t = b.reach(TxState::Posted);
    auto escrow = b.ledger.balance_of(t.escrow).minor();
    auto fee = b.ledger.balance_of(b.protocol.fee_account()).minor();
    auto accepted = b.protocol.accept_question(t, b.seller, b.terms.answer_deadline);
    EXPECT_EQ(accepted.state, TxState::Accepted);
    EXPECT_EQ(b.ledger.balance_of(t.escrow).minor() - escrow, 100000);
    EXPECT_EQ(b.ledger.balance_of(b.protocol.fee_account()).minor() - fee, 5000);

    auto t2 = b.reach(TxState::Posted);
    EXPECT_QAX_ERROR(b.protocol.accept_question(t2, b.buyer, 0), ErrorCode::SelfDealing);
    EXPECT_QAX_ERROR(b.protocol.accept_question(t2, b.seller, b.terms.answer_deadline + 1), ErrorCode::DeadlinePassed);
}

TEST(AcceptQuestion, SellerShortOfStake)
{
    Exact x;
    x.ledger.fund(x.buyer.account, Money{245000});
    x.ledger.fund(x.seller.account, Money{104999});
    auto t = x.protocol.post_question(
        x.protocol.create_question("q", x.buyer, "?", test::binding_spec(), reference_terms()));
    auto before = x.ledger.journal().size();
    EXPECT_QAX_ERROR(x.protocol.accept_question(t, x.seller, 0), ErrorCode::InsufficientFunds);
    EXPECT_EQ(x.ledger.journal().size(), before);
}

TEST(SubmitAnswer, Examples)
{
    Bench b(reference_terms());
    auto t = b.reach(TxState::Accepted);
    auto answered = b.protocol.submit_answer(t, b.seller.pseudonym, "compound-17", b.terms.answer_deadline);
    EXPECT_EQ(answered.state, TxState::Answered);
    EXPECT_EQ(answered.answer->canonical, "compound-17");

    auto rejected = b.protocol.submit_answer(t, b.seller.pseudonym, "compound-99", 0);
    EXPECT_EQ(rejected.state, TxState::AnswerRejected);
    auto seller_before = b.ledger.balance_of(b.seller.account);
    auto sink_before = b.ledger.balance_of(b.protocol.sink_account());
    auto settled = b.protocol.settle(rejected);
    EXPECT_EQ(b.ledger.balance_of(b.protocol.sink_account()) - sink_before, Money{100000});
    EXPECT_EQ(b.ledger.balance_of(b.seller.account), seller_before);
    EXPECT_EQ(net_for(b.ledger, settled.id, b.seller.account), -105000);

    EXPECT_QAX_ERROR(b.protocol.submit_answer(t, b.seller.pseudonym, "none", b.terms.answer_deadline + 1),
                     ErrorCode::DeadlinePassed);
    EXPECT_QAX_ERROR(b.protocol.submit_answer(t, b.buyer.pseudonym, "none", 0), ErrorCode::NotSeller);
}

TEST(SubmitEvidence, Examples)
{
    Bench b(reference_terms());
    auto t = b.reach(TxState::Answered);
    auto on_time = b.protocol.submit_evidence(t, b.buyer.pseudonym, "body", b.terms.evidence_deadline);
    EXPECT_EQ(on_time.state, TxState::EvidenceSubmitted);
    EXPECT_EQ(on_time.evidence->submitted_at, b.terms.evidence_deadline);
    EXPECT_QAX_ERROR(b.protocol.submit_evidence(t, b.buyer.pseudonym, "body", b.terms.evidence_deadline + 1),
                     ErrorCode::DeadlinePassed);
    EXPECT_QAX_ERROR(b.protocol.submit_evidence(t, b.seller.pseudonym, "body", 0), ErrorCode::NotBuyer);
}

TEST(SubmitEvidence, DigestRoundTrip)
{
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    Bench b(reference_terms());
    std::string body("\x00\xff binary \n evidence", 20);
    auto t = b.protocol.submit_evidence(b.reach(TxState::Answered), b.buyer.pseudonym, body, 0);
    auto reread = transaction_from_json(nlohmann::json::parse(transaction_to_json(t).dump()));
    EXPECT_EQ(reread.evidence->body, body);
    EXPECT_EQ(sha256_hex(reread.evidence->body), reread.evidence->digest);
    EXPECT_EQ(reread.evidence->digest, t.evidence->digest);
}

TEST(Adjudicate, Examples)
{
    Bench b(reference_terms());
    auto t = b.reach(TxState::EvidenceSubmitted);
    EXPECT_EQ(b.protocol.adjudicate(t, Verdict::Correct).verdict, Verdict::Correct);
    EXPECT_EQ(b.protocol.adjudicate(t, Verdict::Incorrect).verdict, Verdict::Incorrect);
    EXPECT_EQ(b.protocol.adjudicate(t, Verdict::Incorrect).state, TxState::Adjudicated);
    EXPECT_QAX_ERROR(b.protocol.adjudicate(b.reach(TxState::Answered), Verdict::Correct), ErrorCode::WrongState);
}

TEST(Settle, CorrectExample)
{
    Bench b(reference_terms());
    auto t = b.reach(TxState::Adjudicated, Verdict::Correct);
    auto s = b.protocol.settle(t);
    auto moves = test::settlement_movements(b.ledger, s);
    std::int64_t to_seller = 0, to_buyer = 0, to_sink = 0;
    for (const auto& m : moves) {
        to_seller += m.to == "seller" ? m.amount : 0;
        to_buyer += m.to == "buyer" ? m.amount : 0;
        to_sink += m.to == "sink" ? m.amount : 0;
    }
    EXPECT_EQ(to_seller, 300000);
    EXPECT_EQ(to_buyer, 40000);
    EXPECT_EQ(to_sink, 0);
    EXPECT_EQ(b.ledger.balance_of(s.escrow), Money{0});
    EXPECT_EQ(s.state, TxState::Settled);
    EXPECT_EQ(s.settled_from, TxState::Adjudicated);
}

TEST(Settle, IncorrectChargesBuyerTheSame)
{
    Bench b(reference_terms());
    auto right = b.settled(SettlementPath::Correct);
    auto wrong = b.settled(SettlementPath::Incorrect);
    EXPECT_EQ(net_for(b.ledger, right.id, b.buyer.account), -205000);
    EXPECT_EQ(net_for(b.ledger, wrong.id, b.buyer.account), -205000);
    EXPECT_EQ(net_for(b.ledger, wrong.id, *b.ledger.sink_account()), 300000);
}

TEST(Settle, ExpiredUnacceptedUnwindsFully)
{
    Exact x;
    x.ledger.fund(x.buyer.account, Money{245000});
    auto t = x.protocol.post_question(
        x.protocol.create_question("q", x.buyer, "?", test::binding_spec(), reference_terms()));
    t = x.protocol.settle(Protocol::advance_time(t, 1001));
    EXPECT_EQ(x.ledger.balance_of(x.buyer.account), Money{245000});
    EXPECT_EQ(x.ledger.balance_of(x.protocol.fee_account()), Money{0});
    EXPECT_EQ(x.ledger.total_supply(), Money{245000});
}

TEST(Settle, MatchesTableForEveryPath)
{
    for (auto path : kAllSettlementPaths) {
        Bench b(reference_terms());
        auto supply = b.supply();
        auto s = b.settled(path);
        EXPECT_EQ(test::settlement_movements(b.ledger, s), test::table_row(path, b.terms)) << to_string(path);
        EXPECT_EQ(b.ledger.balance_of(s.escrow), Money{0});
        EXPECT_EQ(b.supply(), supply);
    }
}

TEST(Settle, DetectsTamperedEscrow)
{
    Bench b(reference_terms());
    auto t = b.reach(TxState::Adjudicated);
    b.ledger.fund(t.escrow, Money{1});
    auto before = b.ledger.journal().size();
    EXPECT_QAX_ERROR(b.protocol.settle(t), ErrorCode::EscrowMismatch);
    EXPECT_EQ(b.ledger.journal().size(), before);
}

TEST(Settle, ZeroFeesSkipZeroEntries)
{
    auto terms = reference_terms();
    terms.buyer_fee = Money{0};
    terms.seller_fee = Money{0};
    for (auto path : kAllSettlementPaths) {
        Bench b(terms);
        auto s = b.settled(path);
        EXPECT_EQ(b.ledger.balance_of(s.escrow), Money{0});
        EXPECT_EQ(b.ledger.balance_of(*b.ledger.fee_account()), Money{0});
    }
}

TEST(AdvanceTime, Examples)
{
    Bench b(reference_terms());
    auto posted = b.reach(TxState::Posted);
    EXPECT_EQ(Protocol::advance_time(posted, b.terms.answer_deadline).state, TxState::Posted);
    auto accepted = b.reach(TxState::Accepted);
    EXPECT_EQ(Protocol::advance_time(accepted, b.terms.answer_deadline + 1).state, TxState::ExpiredUnanswered);
    auto answered = b.reach(TxState::Answered);
    EXPECT_EQ(Protocol::advance_time(answered, b.terms.evidence_deadline).state, TxState::Answered);
    EXPECT_EQ(Protocol::advance_time(answered, b.terms.evidence_deadline + 1).state, TxState::ExpiredUnverified);
    for (auto s : kAllStates) {
        auto t = b.reach(s);
        for (Timestamp now : {Timestamp{0}, b.terms.answer_deadline + 1, b.terms.evidence_deadline + 1}) {
            auto once = Protocol::advance_time(t, now);
            EXPECT_EQ(Protocol::advance_time(once, now), once);
        }
    }
}

TEST(StateMachine, EveryStateOperationPairIsAnEdgeOrWrongState)
{
    Bench b(reference_terms());
    int edges = 0, refusals = 0;
    for (auto state : kAllStates)
        for (auto op : kAllOps)
            for (Timestamp now : {Timestamp{0}, b.terms.answer_deadline + 1, b.terms.evidence_deadline + 1}) {
                auto t = b.reach(state);
                ASSERT_EQ(t.state, state);
                auto expected = allowed(state, op);
                bool late = (op == Op::Accept || op == Op::Answer) ? now > b.terms.answer_deadline
                            : op == Op::Evidence                    ? now > b.terms.evidence_deadline
                                                                    : false;
                try {
                    auto next = apply_op(b, t, op, now);
                    EXPECT_TRUE(expected.contains(next.state))
                        << to_string(state) << " -> " << to_string(next.state);
                    EXPECT_FALSE(late && op != Op::Advance);
                    ++edges;
                } catch (const Error& e) {
                    if (expected.empty()) {
                        EXPECT_EQ(e.code(), ErrorCode::WrongState) << to_string(state);
                        ++refusals;
                    } else {
                        EXPECT_TRUE(late) << to_string(state) << " " << e.what();
                        EXPECT_EQ(e.code(), ErrorCode::DeadlinePassed);
                    }
                }
            }
    EXPECT_GT(edges, 0);
    EXPECT_GT(refusals, 0);
}

TEST(StateMachine, EveryReachableStateTerminates)
{
    Bench b(reference_terms());
    for (auto start : kAllStates) {
        auto t = b.reach(start);
        Timestamp now = 0;
        for (int step = 0; step < 10 && t.state != TxState::Settled; ++step) {
            // Draft and EvidenceSubmitted wait on a party, not a deadline.
            if (t.state == TxState::Draft)
                t = b.protocol.post_question(t);
            else if (t.state == TxState::EvidenceSubmitted)
                t = b.protocol.adjudicate(t, Verdict::InsufficientEvidence);
            now += 1000;
            t = Protocol::advance_time(t, now);
            if (settlement_path(t))
                t = b.protocol.settle(t);
        }
        EXPECT_EQ(t.state, TxState::Settled) << to_string(start);
        EXPECT_EQ(b.ledger.balance_of(t.escrow), Money{0});
    }
}

TEST(ProtocolProperty, SellerPayoffSign)
{
    Bench b(reference_terms());
    const auto P = 200000, S = 100000, FA = 5000;
    auto net = [&](SettlementPath p) { return net_for(b.ledger, b.settled(p).id, b.seller.account); };
    EXPECT_EQ(net(SettlementPath::Correct), P - FA);
    EXPECT_EQ(net(SettlementPath::ExpiredUnverified), P - FA);
    EXPECT_EQ(net(SettlementPath::InsufficientEvidence), P - FA);
    EXPECT_EQ(net(SettlementPath::Incorrect), -S - FA);
    EXPECT_EQ(net(SettlementPath::AnswerRejected), -S - FA);
    EXPECT_EQ(net(SettlementPath::ExpiredUnanswered), -S - FA);
}

TEST(ProtocolProperty, FeeIndependenceAcrossRandomTerms)
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::int64_t> amount(1, 1'000'000);
    for (int i = 0; i < 200; ++i) {
        Terms t{Money{amount(rng)}, Money{amount(rng)}, Money{amount(rng)}, Money{amount(rng) - 1},
                Money{amount(rng) - 1}, 1000, 2000};
        for (auto path : kAllSettlementPaths) {
            Bench b(t);
            auto fee_before = b.ledger.balance_of(b.protocol.fee_account());
            auto supply = b.supply();
            auto s = b.settled(path);
            auto delta = (b.ledger.balance_of(b.protocol.fee_account()) - fee_before).minor();
            auto expected = path == SettlementPath::ExpiredUnaccepted ? 0 : (t.buyer_fee + t.seller_fee).minor();
            ASSERT_EQ(delta, expected) << to_string(path);
            ASSERT_EQ(b.supply(), supply);
            ASSERT_EQ(b.ledger.balance_of(s.escrow), Money{0});
            if (path == SettlementPath::Correct || path == SettlementPath::Incorrect)
                ASSERT_EQ(net_for(b.ledger, s.id, b.buyer.account), -(t.price + t.buyer_fee).minor());
        }
    }
}

TEST(ProtocolProperty, SinkIsOnlyEverCredited)
{
    Bench b(reference_terms());
    for (auto path : kAllSettlementPaths)
        b.settled(path);
    for (const auto& e : b.ledger.journal())
        EXPECT_FALSE(e.debit && *e.debit == *b.ledger.sink_account());
}

TEST(TransactionJson, RoundTrip)
{
    Bench b(reference_terms());
    for (auto s : kAllStates) {
        auto t = b.reach(s);
        auto text = transaction_to_json(t).dump();
        auto back = transaction_from_json(nlohmann::json::parse(text));
        EXPECT_EQ(back, t) << to_string(s);
        EXPECT_EQ(transaction_to_json(back).dump(), text);
        EXPECT_EQ(nlohmann::json::parse(text)["state"], std::string(to_string(s)));
    }
}

TEST(PayoutPlan, AgreesWithHandWrittenTable)
{
    auto terms = reference_terms();
    auto name = [](Role r) -> std::string {
        switch (r) {
        case Role::Buyer: return "buyer";
        case Role::Seller: return "seller";
        case Role::Escrow: return "escrow";
        case Role::ExchangeFee: return "exchange_fee";
        case Role::Sink: return "sink";
        }
        return "";
    };
    for (auto path : kAllSettlementPaths) {
        std::vector<test::Movement> got;
        for (const auto& p : payout_plan(terms, path))
            got.push_back({name(p.from), name(p.to), p.amount.minor(), std::string(to_string(p.reason))});
        EXPECT_EQ(got, test::table_row(path, terms));
    }
}
