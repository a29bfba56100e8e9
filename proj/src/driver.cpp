#include "rq/driver.hpp"

#include <fnmatch.h>

#include <fstream>
#include <sstream>

#include "rq/pretty.hpp"

namespace rq::driver {

using json = nlohmann::ordered_json;

namespace {

std::string span_text(Span s) { return std::to_string(s.line) + ":" + std::to_string(s.col); }

json error_json(const std::string& code, const std::string& rule, Span span, const std::string& detail) {
    json e;
    e["code"] = code;
    e["rule"] = rule;
    e["span"] = {{"line", span.line}, {"col", span.col}};
    e["detail"] = detail;
    return e;
}

Output failure(int exit, const std::string& status, const std::string& code, const std::string& rule, Span span,
               const std::string& detail) {
    Output o;
    o.exit = exit;
    o.doc["status"] = status;
    o.doc["error"] = error_json(code, rule, span, detail);
    o.text = status + ": " + code;
    if (!rule.empty()) o.text += " [" + rule + "]";
    o.text += " at " + span_text(span) + ": " + detail;
    return o;
}

Output from_type_error(const TypeError& e) {
    int exit = e.code == ErrorCode::FuelExhausted ? kFuel : kRejected;
    return failure(exit, "rejected", std::string(code_name(e.code)), e.rule, e.span, e.detail);
}

CheckOptions check_opts(const RunOptions& o) { return CheckOptions{o.sub_fuel, o.trace}; }

// Parses, elaborates and validates; returns a failure Output if any stage fails.
std::variant<Program, Output> load(const std::string& source, const RunOptions& opts) {
    try {
        Program p = parse_and_elaborate(source);
        if (auto bad = validate_store(p, check_opts(opts)))
            return failure(kRejected, "rejected", std::string(code_name(ErrorCode::ScopeError)), "store", {}, *bad);
        return p;
    } catch (const ParseError& e) {
        std::string msg = e.what();
        auto colon = msg.find(": ");
        return failure(kInternal, "parse-error", "ParseError", "", e.span,
                       colon == std::string::npos ? msg : msg.substr(colon + 2));
    } catch (const ElabError& e) {
        return failure(kRejected, "rejected", std::string(code_name(e.code)), "scope", e.span, e.what());
    }
}

json trace_json(const std::vector<TraceEntry>& trace) {
    json arr = json::array();
    for (const TraceEntry& t : trace)
        arr.push_back({{"rule", t.rule}, {"span", {{"line", t.span.line}, {"col", t.span.col}}}, {"type", t.result}});
    return arr;
}

std::string trace_text(const std::vector<TraceEntry>& trace) {
    std::string out;
    for (const TraceEntry& t : trace) out += "  " + span_text(t.span) + " " + t.rule + " : " + t.result + "\n";
    return out;
}

json store_json(const Store& store, const StoreTyping& sigma) {
    json arr = json::array();
    for (Id l = 0; l < store.cells.size(); ++l) {
        json c;
        c["loc"] = "@" + std::to_string(l);
        c["value"] = pretty(store.cells[l]);
        if (sigma.contains(l)) c["type"] = pretty(sigma.at(l));
        arr.push_back(std::move(c));
    }
    return arr;
}

}  // namespace

std::optional<std::string> validate_store(const Program& p, const CheckOptions& opts) {
    if (auto bad = store_wf(p.sigma)) return bad;
    TypeEnv empty;
    Qualifier phi = full_observation(empty, p.sigma);
    for (Id l = 0; l < p.store.cells.size(); ++l) {
        if (auto e = check_against(empty, p.sigma, phi, p.store.cells[l], p.sigma.at(l), opts))
            return "@" + std::to_string(l) + ": initial value does not have its declared type (" +
                   std::string(code_name(e->code)) + ": " + e->detail + ")";
    }
    return std::nullopt;
}

Output run_check(const std::string& source, const RunOptions& opts) {
    auto loaded = load(source, opts);
    if (auto* o = std::get_if<Output>(&loaded)) return *o;
    Program& p = std::get<Program>(loaded);
    Output out;
    json types = json::array();
    for (const TermPtr& t : p.terms) {
        CheckOutcome r = check_program(p.env, p.sigma, t, check_opts(opts));
        if (auto* e = error_of(r)) return from_type_error(*e);
        const TypingResult& ok = *ok_result(r);
        std::string printed = pretty(ok.qtype, &p.env);
        types.push_back(printed);
        out.text += printed + "\n";
        if (opts.trace) {
            out.doc["trace"] = trace_json(ok.trace);
            out.text += trace_text(ok.trace);
        }
    }
    json doc;
    doc["status"] = "accepted";
    if (types.size() == 1)
        doc["qtype"] = types[0];
    else
        doc["qtypes"] = types;
    if (out.doc.contains("trace")) doc["trace"] = out.doc["trace"];
    out.doc = std::move(doc);
    out.exit = kAccepted;
    return out;
}

Output run_eval(const std::string& source, const RunOptions& opts) {
    auto loaded = load(source, opts);
    if (auto* o = std::get_if<Output>(&loaded)) return *o;
    Program& p = std::get<Program>(loaded);
    if (p.terms.size() != 1)
        return failure(kInternal, "error", "Usage", "", {}, "eval expects a single expression");
    if (!p.env.entries().empty())
        return failure(kRejected, "rejected", "NotClosed", "", {}, "eval needs a closed program without assumptions");
    CheckOutcome r = check_program(p.env, p.sigma, p.terms[0], check_opts(opts));
    if (auto* e = error_of(r)) return from_type_error(*e);
    const TypingResult& ok = *ok_result(r);

    Output out;
    json& doc = out.doc;
    if (opts.verify_preservation) {
        PreservationReport rep = check_preservation(p.terms[0], p.sigma, p.store, opts.fuel, check_opts(opts));
        doc["status"] = std::string(outcome_name(rep.outcome));
        doc["qtype"] = pretty(ok.qtype);
        doc["value"] = pretty(rep.final_term);
        doc["steps"] = rep.steps.size();
        json steps = json::array();
        for (const PreservationStep& s : rep.steps) {
            json j;
            j["index"] = s.index;
            j["event"] = std::string(event_name(s.event));
            j["witness"] = pretty(s.witness);
            j["exact"] = s.exact;
            if (!s.problem.empty()) j["problem"] = s.problem;
            steps.push_back(std::move(j));
        }
        doc["preservation"] = {{"violations", rep.violations},
                               {"progress_violations", rep.progress_violations},
                               {"steps", std::move(steps)}};
        doc["store"] = store_json(rep.final_store, rep.final_sigma);
        doc["store_size"] = rep.final_store.size();
        out.text = std::string(outcome_name(rep.outcome)) + ": " + pretty(rep.final_term) + "\n";
        out.text += "steps: " + std::to_string(rep.steps.size()) + ", preservation violations: " +
                    std::to_string(rep.violations) + ", progress violations: " +
                    std::to_string(rep.progress_violations) + "\n";
        out.text += "store: " + std::to_string(rep.final_store.size()) + " cells\n";
        for (const PreservationStep& s : rep.steps) {
            if (s.event != EventKind::Alloc && s.problem.empty()) continue;
            out.text += "  step " + std::to_string(s.index) + " " + std::string(event_name(s.event));
            if (s.event == EventKind::Alloc) out.text += " witness " + pretty(s.witness);
            out.text += s.problem.empty() ? ": ok\n" : ": " + s.problem + "\n";
        }
        if (rep.outcome == EvalOutcome::OutOfFuel)
            out.exit = kFuel;
        else if (rep.violations || rep.progress_violations || rep.outcome == EvalOutcome::Stuck)
            out.exit = kRejected;
        return out;
    }
    EvalResult ev = evaluate(ok.elaborated, p.store, opts.fuel, opts.trace);
    doc["status"] = std::string(outcome_name(ev.outcome));
    doc["qtype"] = pretty(ok.qtype);
    doc["value"] = pretty(ev.term);
    doc["steps"] = ev.steps;
    if (ev.outcome == EvalOutcome::Stuck) doc["reason"] = ev.stuck_reason;
    doc["store"] = store_json(ev.store, {});
    doc["store_size"] = ev.store.size();
    if (opts.trace) doc["trace"] = ev.trace;
    out.text = std::string(outcome_name(ev.outcome)) + ": " + pretty(ev.term) + "\n";
    out.text += "store: " + std::to_string(ev.store.size()) + " cells\n";
    if (ev.outcome == EvalOutcome::Stuck) out.text += "  reason: " + ev.stuck_reason + "\n";
    if (opts.trace)
        for (const std::string& s : ev.trace) out.text += "  " + s + "\n";
    if (ev.outcome == EvalOutcome::OutOfFuel) out.exit = kFuel;
    if (ev.outcome == EvalOutcome::Stuck) out.exit = kRejected;
    return out;
}

Output run_sep(const std::string& source, const RunOptions& opts) {
    auto loaded = load(source, opts);
    if (auto* o = std::get_if<Output>(&loaded)) return *o;
    Program& p = std::get<Program>(loaded);
    if (p.terms.size() != 2)
        return failure(kInternal, "error", "Usage", "", {}, "sep expects two expressions separated by '||'");
    if (!p.env.entries().empty())
        return failure(kRejected, "rejected", "NotClosed", "", {}, "sep needs a closed program without assumptions");
    SeparationReport rep = separation_experiment(p.terms[0], p.terms[1], p.sigma, p.store, opts.fuel, check_opts(opts));
    Output out;
    json& doc = out.doc;
    if (!rep.premise_ok) {
        const bool overlap = rep.premise_problem.rfind("qualifiers overlap", 0) == 0;
        return failure(kRejected, "premise-failed", overlap ? "OverlapViolation" : "TypeError", "separation premise",
                       p.terms[1]->span, rep.premise_problem);
    }
    bool ok = rep.violations.empty() && rep.disjoint;
    doc["status"] = ok ? "separated" : "violated";
    doc["steps"] = rep.steps;
    doc["values"] = {pretty(rep.final1), pretty(rep.final2)};
    auto locs = [](const std::vector<Id>& g) {
        json a = json::array();
        for (Id l : g) a.push_back("@" + std::to_string(l));
        return a;
    };
    doc["reach"] = {locs(rep.graph1), locs(rep.graph2)};
    doc["disjoint"] = rep.disjoint;
    doc["violations"] = rep.violations;
    out.text = std::string(ok ? "separated" : "violated") + " after " + std::to_string(rep.steps) + " steps\n";
    out.text += "  left:  " + pretty(rep.final1) + " reaches " + locs(rep.graph1).dump() + "\n";
    out.text += "  right: " + pretty(rep.final2) + " reaches " + locs(rep.graph2).dump() + "\n";
    for (const std::string& v : rep.violations) out.text += "  " + v + "\n";
    out.exit = ok ? kAccepted : kRejected;
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string default_corpus_dir() {
#ifdef RQ_CORPUS_DIR
    return RQ_CORPUS_DIR;
#else
    return "corpus";
#endif
}

std::vector<CorpusEntry> load_manifest(const std::string& dir) {
    json m = json::parse(read_file(dir + "/manifest.json"));
    std::vector<CorpusEntry> out;
    for (const json& j : m.at("entries")) {
        CorpusEntry e;
        e.name = j.at("name").get<std::string>();
        e.file = j.value("file", e.name + ".rq");
        e.kind = j.value("kind", "check");
        e.accept = j.value("accept", true);
        e.type = j.value("type", "");
        e.code = j.value("code", "");
        e.run = j.value("run", false);
        e.value = j.value("value", "");
        if (j.contains("tags")) e.tags = j.at("tags").get<std::vector<std::string>>();
        out.push_back(std::move(e));
    }
    return out;
}

bool matches_filter(const CorpusEntry& e, const std::string& filter) {
    if (filter.empty()) return true;
    std::string pat = filter.find_first_of("*?[") == std::string::npos ? "*" + filter + "*" : filter;
    if (fnmatch(pat.c_str(), e.name.c_str(), 0) == 0) return true;
    for (const std::string& t : e.tags)
        if (fnmatch(pat.c_str(), t.c_str(), 0) == 0) return true;
    return false;
}

CorpusResult run_entry(const std::string& dir, const CorpusEntry& e, const RunOptions& opts) {
    CorpusResult res;
    res.entry = e;
    const CheckOptions copts = check_opts(opts);
    Program p;
    try {
        p = parse_and_elaborate(read_file(dir + "/" + e.file));
    } catch (const ParseError& err) {
        res.got = "ParseError";
        res.detail = err.what();
        res.pass = !e.accept && e.code == "ParseError";
        return res;
    } catch (const ElabError& err) {
        res.got = std::string(code_name(err.code));
        res.detail = err.what();
        res.pass = !e.accept && res.got == e.code;
        return res;
    } catch (const std::exception& err) {
        res.got = "error";
        res.detail = err.what();
        return res;
    }
    if (auto bad = validate_store(p, copts)) {
        res.got = "ScopeError";
        res.detail = *bad;
        res.pass = !e.accept && e.code == "ScopeError";
        return res;
    }

    if (e.kind == "sep") {
        if (p.terms.size() != 2) {
            res.detail = "separation entry needs two expressions";
            return res;
        }
        SeparationReport rep = separation_experiment(p.terms[0], p.terms[1], p.sigma, p.store, opts.fuel, copts);
        res.steps = rep.steps;
        res.sep_disjoint = rep.disjoint;
        res.sep_violations = rep.violations.size();
        res.evaluated = rep.premise_ok;
        if (!rep.premise_ok) {
            res.got = rep.premise_problem.rfind("qualifiers overlap", 0) == 0 ? "OverlapViolation" : "premise-failed";
            res.detail = rep.premise_problem;
            res.pass = !e.accept && (e.code.empty() || e.code == res.got);
            return res;
        }
        res.got = rep.violations.empty() && rep.disjoint ? "separated" : "violated";
        if (!rep.violations.empty()) res.detail = rep.violations.front();
        res.pass = e.accept && res.got == "separated";
        return res;
    }

    if (p.terms.size() != 1) {
        res.detail = "check entry needs one expression";
        return res;
    }
    CheckOutcome r = check_program(p.env, p.sigma, p.terms[0], copts);
    if (auto* err = error_of(r)) {
        res.got = std::string(code_name(err->code));
        res.detail = err->rule + ": " + err->detail;
        res.pass = !e.accept && res.got == e.code;
        return res;
    }
    const TypingResult& ok = *ok_result(r);
    res.got = pretty(ok.qtype, &p.env);
    if (!e.accept) {
        res.detail = "expected rejection with " + e.code;
        return res;
    }
    if (!e.type.empty() && res.got != e.type) {
        res.detail = "expected " + e.type;
        return res;
    }
    res.pass = true;

    const bool closed = p.env.entries().empty();
    if (closed && is_value(*ok.elaborated)) {
        ++res.value_lemma_checks;
        if (auto bad = value_lemmas(ok.elaborated, p.sigma, copts)) {
            res.value_lemmas_ok = false;
            res.pass = false;
            res.detail = "value lemma: " + *bad;
        }
    }
    if (!e.run || !closed) return res;

    PreservationReport rep = check_preservation(p.terms[0], p.sigma, p.store, opts.fuel, copts);
    res.evaluated = true;
    res.steps = rep.steps.size();
    res.preservation_violations = rep.violations;
    res.progress_violations = rep.progress_violations;
    for (const PreservationStep& s : rep.steps) {
        if (s.event != EventKind::Alloc) continue;
        ++res.alloc_steps;
        std::vector<Id> witness;
        for (const Atom& a : s.witness.atoms())
            if (a.is_loc()) witness.push_back(a.a);
        if (witness != s.new_locations || s.witness.fresh()) ++res.witness_mismatches;
    }
    if (rep.violations || rep.progress_violations) {
        res.pass = false;
        for (const PreservationStep& s : rep.steps)
            if (!s.problem.empty()) {
                res.detail = "step " + std::to_string(s.index) + ": " + s.problem;
                break;
            }
    }
    if (rep.outcome != EvalOutcome::Value) {
        res.pass = false;
        if (res.detail.empty()) res.detail = "evaluation ended " + std::string(outcome_name(rep.outcome));
        return res;
    }
    if (!e.value.empty() && pretty(rep.final_term) != e.value) {
        res.pass = false;
        res.detail = "final value " + pretty(rep.final_term) + ", expected " + e.value;
    }
    ++res.value_lemma_checks;
    if (auto bad = value_lemmas(rep.final_term, rep.final_sigma, copts)) {
        res.value_lemmas_ok = false;
        res.pass = false;
        if (res.detail.empty()) res.detail = "value lemma: " + *bad;
    }
    return res;
}

std::vector<CorpusResult> run_corpus(const std::string& dir, const std::string& filter, const RunOptions& opts) {
    std::vector<CorpusResult> out;
    for (const CorpusEntry& e : load_manifest(dir))
        if (matches_filter(e, filter)) out.push_back(run_entry(dir, e, opts));
    return out;
}

}  // namespace rq::driver
