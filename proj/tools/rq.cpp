#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "rq/driver.hpp"

using namespace rq::driver;

namespace {

bool use_color() {
    if (const char* c = std::getenv("RQ_COLOR")) return std::string(c) != "0";
    return isatty(STDOUT_FILENO) != 0;
}

std::string paint(const std::string& s, const char* code, bool color) {
    return color ? std::string("\033[") + code + "m" + s + "\033[0m" : s;
}

std::string slurp(const std::string& path) {
    if (path == "-") {
        std::string s, line;
        while (std::getline(std::cin, line)) s += line + "\n";
        return s;
    }
    return read_file(path);
}

int emit(const Output& o, bool as_json, bool color) {
    if (as_json) {
        std::cout << o.doc.dump(2) << "\n";
    } else {
        const char* c = o.exit == kAccepted ? "32" : o.exit == kFuel ? "33" : "31";
        std::string text = o.text;
        auto nl = text.find('\n');
        std::string head = nl == std::string::npos ? text : text.substr(0, nl);
        std::string rest = nl == std::string::npos ? "" : text.substr(nl + 1);
        std::cout << paint(head, c, color) << "\n" << rest;
    }
    return o.exit;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rq: typechecker and evaluator for reachability types"};
    app.require_subcommand(1);

    RunOptions opts;
    bool as_json = false;
    std::string file;

    auto common = [&](CLI::App* sub) {
        sub->add_option("file", file, "source file, or - for stdin")->required();
        sub->add_flag("--json", as_json, "machine-readable output");
        sub->add_option("--sub-fuel", opts.sub_fuel, "fuel for subtyping through type variables")
            ->capture_default_str();
    };

    CLI::App* check = app.add_subcommand("check", "typecheck a program and print its qualified type");
    common(check);
    check->add_flag("--trace", opts.trace, "print the typing derivation");

    CLI::App* eval = app.add_subcommand("eval", "typecheck, then evaluate a closed program");
    common(eval);
    eval->add_option("--fuel", opts.fuel, "maximum number of reduction steps")->capture_default_str();
    eval->add_flag("--trace", opts.trace, "print every intermediate term");
    eval->add_flag("--verify-preservation", opts.verify_preservation, "re-typecheck after every step");

    CLI::App* sep = app.add_subcommand("sep", "run two programs interleaved and check their reachability stays apart");
    common(sep);
    sep->add_option("--fuel", opts.fuel, "maximum number of reduction steps")->capture_default_str();

    CLI::App* corpus = app.add_subcommand("corpus", "run the bundled example corpus");
    std::string dir = default_corpus_dir(), filter;
    bool verbose = false;
    corpus->add_option("--corpus-dir", dir, "directory holding manifest.json")->capture_default_str();
    corpus->add_option("--filter", filter, "glob on entry names and tags");
    corpus->add_flag("--json", as_json, "machine-readable output");
    corpus->add_flag("-v,--verbose", verbose, "print details for passing entries too");
    corpus->add_option("--fuel", opts.fuel, "maximum number of reduction steps")->capture_default_str();
    corpus->add_option("--sub-fuel", opts.sub_fuel, "fuel for subtyping through type variables");

    CLI11_PARSE(app, argc, argv);
    const bool color = use_color();

    try {
        if (*check) return emit(run_check(slurp(file), opts), as_json, color);
        if (*eval) return emit(run_eval(slurp(file), opts), as_json, color);
        if (*sep) return emit(run_sep(slurp(file), opts), as_json, color);

        auto results = run_corpus(dir, filter, opts);
        std::size_t failed = 0;
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const CorpusResult& r : results) {
            if (!r.pass) ++failed;
            if (as_json) {
                arr.push_back({{"name", r.entry.name},
                               {"pass", r.pass},
                               {"got", r.got},
                               {"detail", r.detail},
                               {"steps", r.steps},
                               {"preservation_violations", r.preservation_violations}});
                continue;
            }
            std::cout << paint(r.pass ? "PASS" : "FAIL", r.pass ? "32" : "31", color) << "  " << r.entry.name
                      << "  " << r.got;
            if (r.evaluated) std::cout << "  (" << r.steps << " steps)";
            std::cout << "\n";
            if ((!r.pass || verbose) && !r.detail.empty()) std::cout << "      " << r.detail << "\n";
        }
        if (as_json)
            std::cout << nlohmann::ordered_json{{"total", results.size()}, {"failed", failed}, {"entries", arr}}.dump(2)
                      << "\n";
        else
            std::cout << results.size() - failed << "/" << results.size() << " passed\n";
        return failed ? kRejected : kAccepted;
    } catch (const std::exception& e) {
        std::cerr << "rq: " << e.what() << "\n";
        return kInternal;
    }
}
