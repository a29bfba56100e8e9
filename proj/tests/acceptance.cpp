// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <map>
#include <string>

#include "properties.hpp"
#include "rq/driver.hpp"

using namespace rq;
using namespace rq::driver;
using namespace rqtest;

namespace {

// Pinned tolerances.
constexpr std::size_t kMinCorpusEntries = 25;
constexpr std::size_t kTelescopes = 1000;
constexpr std::size_t kMaxCounterexamples = 0;
constexpr std::uint64_t kMaxUnsound = 0;
constexpr std::size_t kMaxPreservationViolations = 0;
constexpr std::size_t kMaxWitnessMismatches = 0;
constexpr std::size_t kProgressFuel = 100000;
constexpr std::size_t kMaxStuck = 0;
constexpr std::size_t kMinSeparationPairs = 10;
constexpr std::size_t kMaxSeparationViolations = 0;
constexpr std::size_t kMaxLemmaFailures = 0;
constexpr double kTimeBudgetSeconds = 300.0;

int failures = 0;

void report(int n, bool ok, const std::string& name, const std::string& detail) {
    if (!ok) ++failures;
    std::printf("%s  %d  %-28s %s\n", ok ? "PASS" : "FAIL", n, name.c_str(), detail.c_str());
}

}  // namespace

int main() {
    auto start = std::chrono::steady_clock::now();
    RunOptions opts;
    opts.fuel = kProgressFuel;
    std::vector<CorpusResult> corpus = run_corpus(default_corpus_dir(), "", opts);

    // 1
    {
        std::size_t total = 0, exact = 0;
        std::string first;
        for (const auto& r : corpus) {
            if (r.entry.kind != "check") continue;
            ++total;
            if (r.pass) ++exact;
            else if (first.empty()) first = " first mismatch: " + r.entry.name + " got " + r.got;
        }
        report(1, total >= kMinCorpusEntries && exact == total, "corpus exactness",
               std::to_string(exact) + "/" + std::to_string(total) + " exact" + first);
    }

    // 2
    {
        const std::map<std::string, std::string> expected = {
            {"pair-fst", "Ref[Int]^{u}"},  {"pair-snd", "Ref[Int]^{v}"}, {"opair-fst", "Ref[Int]^{p}"},
            {"opair-snd", "Ref[Int]^{p}"}, {"pair-conv", ""},            {"pair-make", ""},
            {"opair-make", ""},
        };
        std::size_t seen = 0, ok = 0;
        for (const auto& r : corpus) {
            auto it = expected.find(r.entry.name);
            if (it == expected.end()) continue;
            ++seen;
            if (r.pass && r.entry.accept && (it->second.empty() || r.got == it->second)) ++ok;
        }
        report(2, seen == expected.size() && ok == seen, "church pairs",
               std::to_string(ok) + "/" + std::to_string(expected.size()) + " pair entries exact");
    }

    // 3
    {
        PropertyTally a = algebra_properties(20240601u, kTelescopes);
        PropertyTally d = distributivity(7u, kTelescopes);
        bool ok = a.telescopes == kTelescopes && a.counterexamples <= kMaxCounterexamples &&
                  d.counterexamples <= kMaxCounterexamples && d.premise_hits > 0;
        std::string detail = std::to_string(a.telescopes) + " telescopes, " + std::to_string(a.checks) +
                             " algebra checks, " + std::to_string(d.premise_hits) + " distributivity instances, " +
                             std::to_string(a.counterexamples + d.counterexamples) + " counterexamples";
        if (!a.first.empty()) detail += "; " + a.first;
        if (!d.first.empty()) detail += "; " + d.first;
        report(3, ok, "qualifier algebra", detail);
    }

    // 4
    {
        OracleTally t = run_oracle();
        report(4, t.unsound <= kMaxUnsound, "oracle soundness",
               std::to_string(t.environments) + " environments, " + std::to_string(t.queries) + " queries, " +
                   std::to_string(t.unsound) + " unsound, " + std::to_string(t.incomplete) + " incomplete" +
                   (t.first_unsound.empty() ? "" : "; " + t.first_unsound));
    }

    // 5, 6
    {
        std::size_t runs = 0, steps = 0, allocs = 0, violations = 0, mismatches = 0, stuck = 0;
        bool counter = false, nested = false, beta_t = false;
        for (const auto& r : corpus) {
            if (!r.evaluated || r.entry.kind != "check") continue;
            ++runs;
            steps += r.steps;
            allocs += r.alloc_steps;
            violations += r.preservation_violations;
            mismatches += r.witness_mismatches;
            stuck += r.progress_violations;
            counter |= r.entry.name == "counter";
            nested |= r.entry.name == "nested-ref";
            beta_t |= r.entry.name == "poly-id-run";
        }
        report(5, runs > 0 && counter && nested && beta_t && violations <= kMaxPreservationViolations &&
                      mismatches <= kMaxWitnessMismatches,
               "dynamic preservation",
               std::to_string(runs) + " programs, " + std::to_string(steps) + " steps, " + std::to_string(allocs) +
                   " allocations, " + std::to_string(violations) + " violations, " + std::to_string(mismatches) +
                   " witness mismatches");
        report(6, runs > 0 && stuck <= kMaxStuck, "dynamic progress",
               std::to_string(runs) + " programs within fuel " + std::to_string(kProgressFuel) + ", " +
                   std::to_string(stuck) + " stuck");
    }

    // 7
    {
        std::size_t pairs = 0, clean = 0, violations = 0;
        for (const auto& r : corpus) {
            if (r.entry.kind != "sep" || !r.entry.accept) continue;
            ++pairs;
            violations += r.sep_violations;
            if (r.pass && r.sep_disjoint && r.sep_violations == 0) ++clean;
        }
        report(7, pairs >= kMinSeparationPairs && clean == pairs && violations <= kMaxSeparationViolations,
               "preservation of separation",
               std::to_string(clean) + "/" + std::to_string(pairs) + " pairs disjoint, " +
                   std::to_string(violations) + " violations");
    }

    // 8
    {
        std::size_t checks = 0, bad = 0;
        for (const auto& r : corpus) {
            checks += r.value_lemma_checks;
            if (!r.value_lemmas_ok) ++bad;
        }
        report(8, checks > 0 && bad <= kMaxLemmaFailures, "value lemmas",
               std::to_string(checks) + " closed values, " + std::to_string(bad) + " failures");
    }

    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("elapsed %.1f s (budget %.0f s)\n", secs, kTimeBudgetSeconds);
    if (secs > kTimeBudgetSeconds) ++failures;
    return failures ? 1 : 0;
}
