#include <deque>

#include "doctest.h"
#include "ltlreplan/ltlf/dfa.hpp"
#include "ltlreplan/ltlf/evaluate.hpp"
#include "ltlreplan/ltlf/parser.hpp"
#include "ltlf_oracle.hpp"

using namespace ltlreplan::ltlf;
using namespace ltlreplan::testing;

TEST_CASE("parse builds the expected trees") {
    CHECK(parse(kPhi1) == Formula::eventually(Formula::conjunction(
                              Formula::atom("pond"), Formula::eventually(Formula::atom("grassland")))));
    CHECK(parse("true") == Formula::truth());
    CHECK(parse(kPhi2) ==
          Formula::conjunction(Formula::until(Formula::negation(Formula::atom("grassland")), Formula::atom("pond")),
                               Formula::eventually(Formula::atom("grassland"))));
}

TEST_CASE("parse precedence and associativity") {
    const auto a = Formula::atom("a"), b = Formula::atom("b"), c = Formula::atom("c");
    CHECK(parse("a | b & c") == Formula::disjunction(a, Formula::conjunction(b, c)));
    CHECK(parse("a & b U c") == Formula::conjunction(a, Formula::until(b, c)));
    CHECK(parse("a U b U c") == Formula::until(a, Formula::until(b, c)));
    CHECK(parse("!a U b") == Formula::until(Formula::negation(a), b));
    CHECK(parse("F a U b") == Formula::until(Formula::eventually(a), b));
    CHECK(parse("  G\t!(a)  ") == Formula::always(Formula::negation(a)));
    CHECK(parse("a & b & c") == Formula::conjunction(Formula::conjunction(a, b), c));
}

TEST_CASE("parse errors carry offsets") {
    try {
        parse("a U");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 3);
    }
    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_THROWS_AS(parse("(a & b"), ParseError);
    CHECK_THROWS_AS(parse("a b"), ParseError);
    CHECK_THROWS_AS(parse("Pond"), ParseError);
    CHECK_THROWS_AS(parse("a # b"), ParseError);
    CHECK_THROWS_AS(parse("false"), ParseError);
}

TEST_CASE("the next operator is rejected explicitly") {
    for (const char* text : {"X a", "a & X b", "next(a)"}) {
        try {
            parse(text);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("next") != std::string::npos);
        }
    }
}

TEST_CASE("atoms are listed in order of first appearance") {
    CHECK(atoms(parse(kPhi2)) == std::vector<std::string>{"grassland", "pond"});
    CHECK(atoms(parse("c U (a & c) | b")) == std::vector<std::string>{"c", "a", "b"});
}

TEST_CASE("evaluate examples") {
    CHECK(evaluate(Formula::truth(), {{}}));
    CHECK(evaluate(parse(kPhi1), {{}, {"pond"}, {"grassland"}}));
    CHECK_FALSE(evaluate(parse(kPhi2), {{"grassland"}, {"pond"}}));
    CHECK(evaluate(parse(kPhi2), {{}, {"pond"}, {"grassland"}}));
    CHECK_THROWS(evaluate(Formula::truth(), {}));
}

TEST_CASE("finite-trace edge cases at the last position") {
    CHECK(evaluate(parse("G a"), {{"a"}}));
    CHECK_FALSE(evaluate(parse("G a"), {{}}));
    CHECK(evaluate(parse("F a"), {{}, {"a"}}));
    CHECK(evaluate(parse("F a"), {{"a"}, {}}));
    CHECK_FALSE(evaluate(parse("a U b"), {{"a"}, {"a"}}));
}

TEST_CASE("evaluate agrees with the backward oracle") {
    for (const auto& text : kCorpus) {
        const Formula f = parse(text);
        for_each_trace(atoms(f), 4, [&](const Trace& t) { REQUIRE(evaluate(f, t) == oracle(f, t)); });
    }
}

TEST_CASE("to_dfa agrees with the oracle on all short traces") {
    for (const auto& text : kCorpus) {
        CAPTURE(text);
        const Formula f = parse(text);
        const Dfa d = to_dfa(f);
        for_each_trace(atoms(f), 4, [&](const Trace& t) { REQUIRE(d.accepts(t) == oracle(f, t)); });
    }
}

TEST_CASE("to_dfa state counts") {
    const Dfa top = to_dfa(Formula::truth());
    CHECK(top.num_states() == 1);
    CHECK(top.is_accepting(0));
    CHECK(top.delta(0, 0) == 0);

    CHECK(to_dfa(parse("F a")).num_states() == 2);

    const Dfa phi2 = to_dfa(parse(kPhi2));
    CHECK(phi2.num_states() == 4);
    CHECK(phi2.bad_states() == std::set<State>{3});
}

TEST_CASE("phi2 automaton transitions") {
    const Dfa d = to_dfa(parse(kPhi2));
    const LabelMask none = 0, g = d.mask_of({"grassland"}), p = d.mask_of({"pond"}), pg = g | p;
    const State init = d.initial();
    const State pond_seen = d.delta(init, p);
    const State accept = d.delta(init, pg);
    const State trap = d.delta(init, g);
    CHECK(init == 0);
    CHECK(trap == 3);
    CHECK(d.is_bad(trap));
    CHECK(d.is_accepting(accept));
    CHECK_FALSE(d.is_accepting(pond_seen));
    CHECK(d.delta(init, none) == init);
    CHECK(d.delta(pond_seen, g) == accept);
    CHECK(d.delta(pond_seen, none) == pond_seen);

    CHECK(d.step(init, p) == pond_seen);
    CHECK(d.step(init, g) == std::nullopt);
    CHECK(d.step(init, p) == d.step(init, p));
    CHECK_THROWS_AS(d.step(trap, none), std::logic_error);

    CHECK(d.accepting_one_hop(pond_seen, g));
    CHECK_FALSE(d.accepting_one_hop(init, none));
}

TEST_CASE("accepting_one_hop matches the oracle on one-step extensions") {
    const Formula f = parse(kPhi1);
    const Dfa d = to_dfa(f);
    for_each_trace(atoms(f), 3, [&](const Trace& prefix) {
        State q = d.initial();
        for (const auto& l : prefix) q = d.delta(q, d.mask_of(l));
        if (d.is_bad(q)) return;
        for (LabelMask m = 0; m < d.num_masks(); ++m) {
            Trace ext = prefix;
            ext.push_back(d.labels_of(m));
            CHECK(d.accepting_one_hop(q, m) == oracle(f, ext));
        }
    });
}

TEST_CASE("bad states") {
    CHECK(compute_bad_states(to_dfa(parse(kPhi2))).size() == 1);
    CHECK(compute_bad_states(to_dfa(parse(kPhi1))).empty());
    const Dfa never = to_dfa(parse("G !a"));
    const auto bad = compute_bad_states(never);
    REQUIRE(bad.size() == 1);
    const State sink = *bad.begin();
    CHECK(never.delta(never.initial(), never.mask_of({"a"})) == sink);
    for (LabelMask m = 0; m < never.num_masks(); ++m) CHECK(never.delta(sink, m) == sink);
}

TEST_CASE("forbidden zones") {
    const Dfa d = to_dfa(parse(kPhi2));
    const std::vector<RegionLabel> regions = {
        {"l1", d.mask_of({"grassland"})}, {"l2", d.mask_of({"pond"})}, {"l3", d.mask_of({"grassland"})}};
    CHECK(forbidden_zones(d, d.initial(), 0, regions) == std::set<std::string>{"l1", "l3"});
    const State pond_seen = d.delta(d.initial(), d.mask_of({"pond"}));
    CHECK(forbidden_zones(d, pond_seen, 0, regions).empty());

    const Dfa phi1 = to_dfa(parse(kPhi1));
    const std::vector<RegionLabel> r1 = {{"l1", phi1.mask_of({"grassland"})}, {"l2", phi1.mask_of({"pond"})}};
    for (State q = 0; q < phi1.num_states(); ++q) CHECK(forbidden_zones(phi1, q, 0, r1).empty());
}

TEST_CASE("forbidden zones follow the literal definition") {
    for (const auto& text : kCorpus) {
        const Dfa d = to_dfa(parse(text));
        std::vector<RegionLabel> regions;
        for (LabelMask m = 0; m < d.num_masks(); ++m) regions.push_back({"r" + std::to_string(m), m});
        for (State q = 0; q < d.num_states(); ++q) {
            if (d.is_bad(q)) continue;
            for (LabelMask cur = 0; cur < d.num_masks(); ++cur) {
                const auto zones = forbidden_zones(d, q, cur, regions);
                const State next = d.delta(q, cur);
                for (const auto& r : regions) CHECK((zones.count(r.id) > 0) == d.is_bad(d.delta(next, r.mask)));
            }
        }
    }
}

TEST_CASE("structural invariants over the corpus") {
    for (const auto& text : kCorpus) {
        CAPTURE(text);
        const Dfa d = to_dfa(parse(text));

        // Minimization is a fixed point.
        const Dfa again = minimize(d);
        REQUIRE(again.num_states() == d.num_states());
        CHECK(again.initial() == d.initial());
        for (State q = 0; q < d.num_states(); ++q)
            for (LabelMask m = 0; m < d.num_masks(); ++m) CHECK(again.delta(q, m) == d.delta(q, m));

        for (State q = 0; q < d.num_states(); ++q) CHECK_FALSE((d.is_bad(q) && d.is_accepting(q)));

        // Pruning soundness: every live state reaches acceptance through live states.
        for (State q = 0; q < d.num_states(); ++q) {
            if (d.is_bad(q)) continue;
            std::vector<bool> seen(d.num_states(), false);
            std::deque<State> queue{q};
            seen[q] = true;
            bool found = false;
            while (!queue.empty() && !found) {
                const State s = queue.front();
                queue.pop_front();
                if (d.is_accepting(s)) found = true;
                for (LabelMask m = 0; m < d.num_masks(); ++m)
                    if (auto t = d.step(s, m); t && !seen[*t]) {
                        seen[*t] = true;
                        queue.push_back(*t);
                    }
            }
            CHECK(found);
        }

        // Without a next operator the language is stutter-invariant.
        for (State q = 0; q < d.num_states(); ++q)
            for (LabelMask m = 0; m < d.num_masks(); ++m) CHECK(d.delta(d.delta(q, m), m) == d.delta(q, m));
    }
}

TEST_CASE("run follows the pruned transitions") {
    const Dfa d = to_dfa(parse(kPhi2));
    const LabelMask g = d.mask_of({"grassland"}), p = d.mask_of({"pond"});
    const std::vector<LabelMask> ok = {0, p, 0, g};
    CHECK(d.run(d.initial(), ok).has_value());
    CHECK(d.is_accepting(*d.run(d.initial(), ok)));
    const std::vector<LabelMask> bad = {0, g, p};
    CHECK_FALSE(d.run(d.initial(), bad).has_value());
    CHECK(d.run_unpruned(d.initial(), bad) == 3);
}

TEST_CASE("mask encoding ignores foreign labels") {
    const Dfa d = to_dfa(parse(kPhi2));
    CHECK(d.mask_of({"grassland", "rock"}) == 1);
    CHECK(d.labels_of(3) == LabelSet{"grassland", "pond"});
}

TEST_CASE("capacity budget") {
    CHECK_THROWS_AS(to_dfa(parse(kPhi2), 2), CapacityError);
    CHECK_THROWS_AS(to_dfa(parse("a & b & c & d & e & f & g & h & i")), std::invalid_argument);
}

TEST_CASE("dot export marks accepting and bad states") {
    const std::string dot = to_dfa(parse(kPhi2)).to_dot();
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("3 [shape=circle, style=dashed]") != std::string::npos);
    CHECK(dot.find("doublecircle") != std::string::npos);
}
