#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "rq/surface.hpp"

namespace rq::driver {

enum ExitCode { kAccepted = 0, kRejected = 1, kInternal = 2, kFuel = 3 };

struct RunOptions {
    std::size_t fuel = kDefaultEvalFuel;
    int sub_fuel = kDefaultSubFuel;
    bool trace = false;
    bool verify_preservation = false;
};

struct Output {
    int exit = kAccepted;
    nlohmann::ordered_json doc;
    std::string text;  // human-readable rendering
};

Output run_check(const std::string& source, const RunOptions& opts);
Output run_eval(const std::string& source, const RunOptions& opts);
Output run_sep(const std::string& source, const RunOptions& opts);

// Store declarations: well-formed typing, initial values typed at their contents.
std::optional<std::string> validate_store(const Program& p, const CheckOptions& opts = {});

struct CorpusEntry {
    std::string name;
    std::string file;
    std::string kind = "check";  // or "sep"
    bool accept = true;
    std::string type;            // expected printed qualified type
    std::string code;            // expected error code
    bool run = false;            // closed program: evaluate and verify
    std::string value;           // expected printed final value, if any
    std::vector<std::string> tags;
};

std::vector<CorpusEntry> load_manifest(const std::string& dir);
bool matches_filter(const CorpusEntry& e, const std::string& filter);

struct CorpusResult {
    CorpusEntry entry;
    bool pass = false;
    std::string got;      // printed type or error code
    std::string detail;   // reason for failure
    std::size_t steps = 0;
    std::size_t preservation_violations = 0;
    std::size_t progress_violations = 0;
    std::size_t alloc_steps = 0;
    std::size_t witness_mismatches = 0;
    bool evaluated = false;
    bool value_lemmas_ok = true;
    std::size_t value_lemma_checks = 0;
    bool sep_disjoint = false;
    std::size_t sep_violations = 0;
};

CorpusResult run_entry(const std::string& dir, const CorpusEntry& e, const RunOptions& opts);
std::vector<CorpusResult> run_corpus(const std::string& dir, const std::string& filter, const RunOptions& opts);

std::string read_file(const std::string& path);
std::string default_corpus_dir();

}  // namespace rq::driver
