#pragma once

// JSON job files in, JSON reports out. Exit codes: 0 ok, 1 mathematical
// negative (not fixed, criterion fails, mismatch), 2 input error.

#include <chrono>
#include <ctime>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "logconn/cover.hpp"
#include "logconn/existence.hpp"
#include "logconn/format.hpp"
#include "logconn/torsion.hpp"

namespace logconn {

using nlohmann::json;
using nlohmann::ordered_json;

inline const std::vector<std::string>& task_names()
{
    static const std::vector<std::string> names{"residue",     "fuchs",      "pushforward", "invariants",
                                                "equivariantize", "roundtrip", "fixed-point", "decompose",
                                                "induce",      "existence",  "obstruction", "agreement"};
    return names;
}

struct JobOptions {
    std::optional<unsigned> field_order;  ///< overrides the job's field_order
    bool timestamp = true;
};

struct JobOutcome {
    int exit_code = 0;
    ordered_json report;
};

namespace detail {

/// Input-shape failure; always exit code 2.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline const json& field(const json& j, const char* key, const std::string& where)
{
    if (!j.is_object() || !j.contains(key))
        throw SchemaError(where + ": missing \"" + key + "\"");
    return j.at(key);
}

inline std::string text_of(const json& j, const std::string& where)
{
    if (j.is_string())
        return j.get<std::string>();
    if (j.is_number_integer())
        return std::to_string(j.get<long>());
    throw SchemaError(where + " must be a string in the scalar grammar");
}

inline long int_of(const json& j, const std::string& where)
{
    if (!j.is_number_integer())
        throw SchemaError(where + " must be an integer");
    return j.get<long>();
}

inline std::vector<long> ints_of(const json& j, const std::string& where)
{
    if (!j.is_array())
        throw SchemaError(where + " must be an array of integers");
    std::vector<long> out;
    for (size_t k = 0; k < j.size(); ++k)
        out.push_back(int_of(j[k], where + "[" + std::to_string(k) + "]"));
    return out;
}

inline Rational rational_of(const json& j, const FieldPtr& ctx, const std::string& where)
{
    FieldElement x = parse_scalar(text_of(j, where), ctx);
    if (!x.is_rational())
        throw SchemaError(where + " must be rational");
    return x.rational_part();
}

inline LogConnection connection_of(const json& j, const FieldPtr& ctx, const std::string& where)
{
    LogConnection c;
    c.bundle.twists = ints_of(field(j, "twists", where), where + ".twists");
    c.matrix = rmatrix_from_json(field(j, "matrix", where), ctx, "connection matrix");
    if (j.contains("singular")) {
        const json& s = j.at("singular");
        if (!s.is_array())
            throw SchemaError(where + ".singular must be an array");
        for (size_t k = 0; k < s.size(); ++k)
            c.singular_set.push_back(parse_point(text_of(s[k], where + ".singular"), ctx));
    }
    if (auto v = conn_validate(c); !v)
        throw MathError(ErrorCode::invalid_connection, where + ": " + v.message);
    return c;
}

inline ordered_json connection_json(const LogConnection& c)
{
    ordered_json out;
    out["twists"] = c.bundle.twists;
    out["matrix"] = matrix_json(c.matrix);
    ordered_json pts = ordered_json::array();
    for (const auto& p : c.singular_set)
        pts.push_back(print_point(p));
    out["singular"] = pts;
    return out;
}

inline CoverDesc cover_of(const json& j, const FieldPtr& ctx)
{
    long n = int_of(field(j, "n", "cover"), "cover.n");
    if (n < 2)
        throw SchemaError("cover.n must be at least 2");
    return CoverDesc::make(static_cast<unsigned>(n), ctx);
}

inline EquivariantConnection equivariant_of(const json& payload, const FieldPtr& ctx)
{
    EquivariantConnection e{cover_of(field(payload, "cover", "payload"), ctx),
                            connection_of(field(payload, "connection", "payload"), ctx, "connection"), FMatrix()};
    e.action = payload.contains("action") ? fmatrix_from_json(payload.at("action"), ctx, "action")
                                          : FMatrix::identity(e.conn.rank());
    return e;
}

inline ParabolicConnection parabolic_of(const json& payload, const FieldPtr& ctx)
{
    ParabolicConnection p{connection_of(field(payload, "connection", "payload"), ctx, "connection"), {}};
    if (payload.contains("flags")) {
        const json& fl = payload.at("flags");
        if (!fl.is_array())
            throw SchemaError("flags must be an array");
        for (size_t k = 0; k < fl.size(); ++k) {
            std::string where = "flags[" + std::to_string(k) + "]";
            ParabolicFlag f;
            f.point = parse_point(text_of(field(fl[k], "point", where), where + ".point"), ctx);
            const json& w = field(fl[k], "weights", where);
            if (!w.is_array())
                throw SchemaError(where + ".weights must be an array");
            for (size_t i = 0; i < w.size(); ++i)
                f.weights.push_back(rational_of(w[i], ctx, where + ".weights"));
            for (long m : ints_of(field(fl[k], "multiplicities", where), where + ".multiplicities")) {
                if (m <= 0)
                    throw SchemaError(where + ".multiplicities must be positive");
                f.multiplicities.push_back(static_cast<size_t>(m));
            }
            p.flags.push_back(std::move(f));
        }
    }
    if (auto v = parabolic_validate(p); !v)
        throw MathError(ErrorCode::invalid_connection, "parabolic data: " + v.message);
    return p;
}

inline ordered_json flags_json(const ParabolicConnection& p)
{
    ordered_json out = ordered_json::array();
    for (const auto& f : p.flags) {
        ordered_json w = ordered_json::array();
        for (const auto& q : f.weights)
            w.push_back(print_scalar(FieldElement(q)));
        out.push_back({{"point", print_point(f.point)}, {"weights", w}, {"multiplicities", f.multiplicities}});
    }
    return out;
}

inline Representation representation_of(const json& j, const FieldPtr& ctx)
{
    const json& mats = field(j, "matrices", "representation");
    if (!mats.is_array() || mats.empty())
        throw SchemaError("representation.matrices must be a nonempty array");
    std::vector<FMatrix> ms;
    for (const auto& m : mats)
        ms.push_back(fmatrix_from_json(m, ctx, "representation matrix"));
    std::map<std::string, FMatrix> residues;
    if (j.contains("residues"))
        for (const auto& [label, m] : j.at("residues").items())
            residues.emplace(label, fmatrix_from_json(m, ctx, "residue"));
    return Representation::make(std::move(ms), std::move(residues));
}

inline Character character_of(const json& j, const FieldPtr& ctx)
{
    long n = int_of(field(j, "order", "character"), "character.order");
    if (n < 2)
        throw SchemaError("character.order must be at least 2");
    return Character::make(ctx, static_cast<unsigned>(n), ints_of(field(j, "exponents", "character"), "character.exponents"));
}

inline ordered_json matrices_json(const std::vector<FMatrix>& ms)
{
    ordered_json out = ordered_json::array();
    for (const auto& m : ms)
        out.push_back(matrix_json(m));
    return out;
}

inline ResiduePrescription prescription_of(const json& j, const FieldPtr& ctx)
{
    ResiduePrescription p;
    const json& pts = field(j, "points", "payload");
    const json& lams = field(j, "lambdas", "payload");
    if (!pts.is_array() || !lams.is_array())
        throw SchemaError("points and lambdas must be arrays");
    for (const auto& x : pts)
        p.points.push_back(parse_point(text_of(x, "points"), ctx));
    for (const auto& x : lams)
        p.lambdas.push_back(parse_scalar(text_of(x, "lambdas"), ctx));
    require_well_formed(p);
    return p;
}

inline std::vector<std::string> words_json(const std::vector<Word>& ws)
{
    std::vector<std::string> out;
    for (const auto& w : ws)
        out.push_back(word_str(w));
    return out;
}

/// Collects pass/fail cross-checks; any failure turns the verdict into a mismatch.
class Checks {
public:
    void add(const std::string& name, bool pass, const std::string& detail = "")
    {
        ordered_json c{{"name", name}, {"pass", pass}};
        if (!detail.empty())
            c["detail"] = detail;
        list_.push_back(std::move(c));
        all_ &= pass;
    }

    /// Validity and the degree relation, recomputed for a published connection.
    void connection(const std::string& name, const LogConnection& c)
    {
        ValidationReport v = conn_validate(c);
        add("valid:" + name, v.ok, v.message);
        FieldElement d = fuchs_check(c);
        add("fuchs:" + name, d.is_zero(), d.is_zero() ? "" : "defect " + print_scalar(d));
    }

    bool all() const { return all_; }
    const ordered_json& list() const { return list_; }

private:
    ordered_json list_ = ordered_json::array();
    bool all_ = true;
};

inline ordered_json residues_json(const LogConnection& c, const std::vector<P1Point>& pts)
{
    ordered_json out = ordered_json::object();
    for (const auto& p : pts)
        out[print_point(p)] = matrix_json(residue_at(c, p).matrix);
    return out;
}

inline std::string utc_timestamp()
{
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Fills `r` and returns the exit code.
inline int dispatch(const std::string& task, const json& payload, const FieldPtr& ctx, ordered_json& r, Checks& checks)
{
    const P1Point zero = P1Point::finite(FieldElement(0)), inf = P1Point::infinity();

    if (task == "residue" || task == "fuchs") {
        LogConnection c = connection_of(field(payload, "connection", "payload"), ctx, "connection");
        std::vector<P1Point> pts = c.singular_set;
        if (payload.contains("point"))
            pts = {parse_point(text_of(payload.at("point"), "point"), ctx)};
        r["residues"] = residues_json(c, pts);
        FieldElement defect = fuchs_check(c);
        r["degree"] = c.bundle.degree();
        r["defect"] = print_scalar(defect);
        checks.connection("input", c);
        return 0;
    }
    if (task == "pushforward" || task == "invariants") {
        EquivariantConnection e = equivariant_of(payload, ctx);
        require_equivariant(e);
        if (task == "pushforward") {
            LogConnection pf = pushforward_full(e);
            r["twists"] = pf.bundle.twists;
            r["residues"] = residues_json(pf, {zero, inf});
            r["connection"] = connection_json(pf);
            r["action"] = matrix_json(pushforward_action(e));
            checks.connection("pushforward", pf);
        } else {
            ParabolicConnection p = invariant_part(e);
            r["twists"] = p.conn.bundle.twists;
            r["flags"] = flags_json(p);
            r["residues"] = residues_json(p.conn, {zero, inf});
            r["connection"] = connection_json(p.conn);
            checks.connection("invariant-part", p.conn);
            ValidationReport v = parabolic_validate(p);
            checks.add("parabolic-splitting", v.ok, v.message);
        }
        return 0;
    }
    if (task == "equivariantize" || task == "roundtrip") {
        CoverDesc cover = cover_of(field(payload, "cover", "payload"), ctx);
        ParabolicConnection p = parabolic_of(payload, ctx);
        if (task == "equivariantize") {
            EquivariantConnection e = equivariantize(p, cover);
            r["connection"] = connection_json(e.conn);
            r["action"] = matrix_json(e.action);
            ValidationReport v = equivariant_validate(e);
            checks.add("equivariance", v.ok, v.message);
            checks.connection("upstairs", e.conn);
            return 0;
        }
        RoundtripReport rt = roundtrip_check(p, cover);
        r["verdict"] = rt.ok ? "ok" : "mismatch";
        if (!rt.message.empty())
            r["message"] = rt.message;
        if (rt.recovered) {
            r["recovered"] = connection_json(rt.recovered->conn);
            r["recovered_flags"] = flags_json(*rt.recovered);
            checks.connection("recovered", rt.recovered->conn);
        }
        if (rt.gauge)
            r["gauge"] = matrix_json(*rt.gauge);
        return rt.ok ? 0 : 1;
    }
    if (task == "fixed-point" || task == "decompose") {
        Representation rho = representation_of(field(payload, "representation", "payload"), ctx);
        Character chi = character_of(field(payload, "character", "payload"), ctx);
        FixedPointResult fp = certify_fixed_point(rho, chi);
        r["status"] = status_name(fp.status);
        r["detail"] = fp.detail;
        if (fp.certificate) {
            r["certificate"] = matrix_json(fp.certificate->h);
            ValidationReport v = verify_certificate(rho, chi, *fp.certificate);
            checks.add("certificate", v.ok, v.message);
        }
        if (fp.status != FixedPointStatus::certified) {
            r["verdict"] = status_name(fp.status);
            return 1;
        }
        if (task == "decompose") {
            Decomposition d = decompose(rho, chi, *fp.certificate);
            r["subgroup_generators"] = words_json(d.subgroup.generators);
            r["v_basis"] = matrix_json(d.v_basis);
            std::vector<size_t> dims;
            for (const auto& b : d.eigenspaces)
                dims.push_back(b.cols());
            r["eigenspace_dimensions"] = dims;
            r["sigma"] = matrices_json(d.sigma.matrices);
            bool iso = find_isomorphism(induce(d.sigma, chi), rho).has_value();
            checks.add("induce-recovers-input", iso);
        }
        return 0;
    }
    if (task == "induce") {
        Representation sigma = representation_of(field(payload, "representation", "payload"), ctx);
        Character chi = character_of(field(payload, "character", "payload"), ctx);
        Representation rho = induce(sigma, chi);
        r["subgroup_generators"] = words_json(schreier_for(chi).generators);
        r["matrices"] = matrices_json(rho.matrices);
        if (!rho.residues.empty()) {
            ordered_json res = ordered_json::object();
            for (const auto& [label, m] : rho.residues)
                res[label] = matrix_json(m);
            r["residues"] = res;
        }
        checks.add("decompose-recovers-sigma", induce_roundtrip(sigma, chi));
        return 0;
    }
    if (task == "existence" || task == "obstruction" || task == "agreement") {
        SplitBundle e{ints_of(field(payload, "twists", "payload"), "twists")};
        ResiduePrescription p = prescription_of(payload, ctx);
        if (!p.all_finite()) {
            MobiusNormalization m = normalize_points(p);
            r["coordinate"] = "1/(z - " + print_scalar(m.a) + ")";
        }
        if (task == "existence") {
            CriterionResult crit = criterion_check(e, p);
            r["verdict"] = crit.exists ? "exists" : "fails";
            if (!crit.exists) {
                r["witness"] = crit.witness;
                r["defect"] = print_scalar(crit.defect);
                return 1;
            }
            LogConnection c = construct_connection(e, p);
            r["connection"] = connection_json(c);
            checks.connection("constructed", c);
            ResiduePrescription fin = detail::finite_prescription(p);
            for (size_t k = 0; k < fin.points.size(); ++k)
                checks.add("central-residue:" + print_point(fin.points[k]),
                           residue_at(c, fin.points[k]).matrix == FMatrix::identity(e.rank()) * fin.lambdas[k]);
            return 0;
        }
        if (task == "obstruction") {
            ObstructionFunctional th = cech_obstruction(e, p);
            ordered_json vals = ordered_json::array();
            for (size_t k = 0; k < th.basis.size(); ++k) {
                const auto& s = th.basis[k];
                vals.push_back({{"entry", {s.i, s.j}}, {"degree", s.m}, {"value", print_scalar(th.values[k])}});
            }
            r["values"] = vals;
            FieldElement id = th.at_identity(e.rank());
            r["identity"] = print_scalar(id);
            checks.add("identity-law", id == FieldElement(e.degree()) + FieldElement(static_cast<long>(e.rank())) * p.lambda_sum());
            r["verdict"] = th.is_zero() ? "zero" : "nonzero";
            return th.is_zero() ? 0 : 1;
        }
        AgreementReport ag = oracle_agreement(e, p);
        r["criterion"] = ag.criterion;
        r["obstruction_vanishes"] = ag.obstruction_vanishes;
        r["construction_valid"] = ag.construction_valid;
        checks.add("identity-law", ag.identity_law);
        checks.add("three-way-agreement", ag.ok, ag.message);
        return 0;
    }
    throw SchemaError("unknown task \"" + task + "\"");
}

}  // namespace detail

/// Runs one job. `task` comes from the command line; a "task" field in the job must agree.
inline JobOutcome run_job(const std::string& task, const json& job, const JobOptions& opts = {})
{
    JobOutcome out;
    ordered_json& r = out.report;
    r["task"] = task;
    try {
        if (!job.is_object())
            throw detail::SchemaError("job must be a JSON object");
        if (std::find(task_names().begin(), task_names().end(), task) == task_names().end())
            throw detail::SchemaError("unknown task \"" + task + "\"");
        if (job.contains("task") && job.at("task") != task)
            throw detail::SchemaError("job is for task " + job.at("task").dump() + ", not \"" + task + "\"");
        long order = opts.field_order ? static_cast<long>(*opts.field_order)
                                      : detail::int_of(detail::field(job, "field_order", "job"), "field_order");
        if (order < 1)
            throw detail::SchemaError("field_order must be positive");
        r["field_order"] = order;
        FieldPtr ctx = field_make(static_cast<unsigned>(order));
        const json empty = json::object();
        const json& payload = job.contains("payload") ? job.at("payload") : empty;
        detail::Checks checks;
        out.exit_code = detail::dispatch(task, payload, ctx, r, checks);
        if (!r.contains("verdict"))
            r["verdict"] = "ok";
        r["checks"] = checks.list();
        if (!checks.all()) {
            r["verdict"] = "check-failed";
            out.exit_code = 1;
        }
    } catch (const ParseError& e) {
        r["verdict"] = "input-error";
        r["error"] = {{"code", error_code_name(e.code())}, {"position", e.position()}, {"message", e.what()}};
        out.exit_code = 2;
    } catch (const MathError& e) {
        r["verdict"] = "input-error";
        r["error"] = {{"code", error_code_name(e.code())}, {"message", e.what()}};
        out.exit_code = 2;
    } catch (const detail::SchemaError& e) {
        r["verdict"] = "input-error";
        r["error"] = {{"code", "schema"}, {"message", e.what()}};
        out.exit_code = 2;
    } catch (const json::exception& e) {
        r["verdict"] = "input-error";
        r["error"] = {{"code", "schema"}, {"message", e.what()}};
        out.exit_code = 2;
    }
    if (opts.timestamp)
        r["timestamp"] = detail::utc_timestamp();
    return out;
}

inline JobOutcome run_job_file(const std::string& task, const std::string& path, const JobOptions& opts = {})
{
    std::ifstream in(path);
    if (!in) {
        JobOutcome out;
        out.report = {{"task", task}, {"verdict", "input-error"}, {"error", {{"code", "io"}, {"message", "cannot read " + path}}}};
        out.exit_code = 2;
        return out;
    }
    json job;
    try {
        job = json::parse(in);
    } catch (const json::parse_error& e) {
        JobOutcome out;
        out.report = {{"task", task}, {"verdict", "input-error"},
                      {"error", {{"code", "json"}, {"position", e.byte}, {"message", e.what()}}}};
        out.exit_code = 2;
        return out;
    }
    return run_job(task, job, opts);
}

}  // namespace logconn
