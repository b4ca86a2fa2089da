#include "topamp/topamp.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#ifndef TOPAMP_VERSION
#define TOPAMP_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace topamp;
using io::Cell;

namespace {

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> r) { rows.push_back(std::move(r)); }

    std::string csv() const {
        io::CsvTable t(header);
        for (const auto& r : rows) t.row(r);
        return t.str();
    }

    json to_json() const {
        json out = json::array();
        for (const auto& r : rows) {
            json obj = json::object();
            for (std::size_t i = 0; i < header.size(); ++i) {
                const Cell& c = r[i];
                if (const double* d = std::get_if<double>(&c))
                    obj[header[i]] = std::isfinite(*d) ? json(*d) : json(io::format_double(*d));
                else if (const long long* v = std::get_if<long long>(&c)) obj[header[i]] = *v;
                else obj[header[i]] = std::get<std::string>(c);
            }
            out.push_back(std::move(obj));
        }
        return out;
    }
};

struct Globals {
    std::string config;
    std::string out;
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

struct Run {
    Globals g;
    std::vector<std::string> argv;
    std::string command;
    json config = json::object();
    std::string config_digest;
    std::vector<Table> tables;
    std::vector<std::pair<std::string, json>> documents;
    std::vector<std::uint64_t> seeds;
    std::string text;  // plain stdout result (winding)

    int threads() const {
        if (g.threads) return std::max(1, *g.threads);
        if (const char* env = std::getenv("TOPAMP_THREADS")) {
            try {
                return std::max(1, std::stoi(env));
            } catch (const std::exception&) {
                throw ModelError("TOPAMP_THREADS must be an integer");
            }
        }
        return 1;
    }

    std::uint64_t seed(std::uint64_t fallback = 0) const { return g.seed.value_or(fallback); }
};

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void load_config(Run& run, bool required) {
    if (run.g.config.empty()) {
        if (required) throw ModelError("--config <json> is required for '" + run.command + "'");
        return;
    }
    std::ifstream in(run.g.config, std::ios::binary);
    if (!in) throw ModelError("cannot open config '" + run.g.config + "'");
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    run.config_digest = io::bytes_digest(bytes);
    try {
        run.config = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw ModelError(std::string("malformed JSON config: ") + e.what());
    }
    if (!run.config.is_object()) throw ModelError("config must be a JSON object");
}

json model_document(Run& run) {
    json doc = run.config;
    if (doc.contains("disorder") && !doc["disorder"].contains("seed")) doc["disorder"]["seed"] = run.seed();
    if (doc.contains("disorder")) run.seeds.push_back(doc["disorder"]["seed"].get<std::uint64_t>());
    return doc;
}

LatticeModel load_model(Run& run) {
    return io::model_from_json(model_document(run));
}

ChainParams load_chain(Run& run, const char* what) {
    if (!run.config.contains("chain")) throw ModelError(std::string(what) + " needs a 'chain' config");
    return io::chain_from_json(run.config["chain"]);
}

template <class T>
T cfg(const Run& run, const char* key, T fallback) {
    return io::get_or(run.config, key, fallback);
}

void emit(const Run& run, const std::chrono::steady_clock::time_point& t0, const std::string& started) {
    std::vector<std::pair<std::string, std::string>> files;
    const bool as_json = run.g.format == "json";
    for (const Table& t : run.tables)
        files.emplace_back(t.name + (as_json ? ".json" : ".csv"), as_json ? t.to_json().dump(2) + "\n" : t.csv());
    for (const auto& [name, doc] : run.documents) files.emplace_back(name + ".json", doc.dump(2) + "\n");

    if (run.g.out.empty()) {
        if (!run.text.empty()) std::cout << run.text;
        for (std::size_t i = 0; i < files.size(); ++i) {
            if (i || !run.text.empty()) std::cout << "\n";
            std::cout << files[i].second;
        }
        return;
    }

    fs::create_directories(run.g.out);
    json listed = json::array();
    for (const auto& [name, body] : files) {
        std::ofstream f(fs::path(run.g.out) / name, std::ios::binary);
        if (!f) throw ModelError("cannot write '" + (fs::path(run.g.out) / name).string() + "'");
        f << body;
        listed.push_back(name);
    }
    if (!run.text.empty()) std::cout << run.text;

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json manifest = {
        {"command", run.argv},
        {"subcommand", run.command},
        {"config", run.g.config},
        {"config_digest", run.config_digest},
        {"parameters", run.config},
        {"seeds", run.seeds},
        {"rng", rng_algorithm},
        {"threads", run.threads()},
        {"format", run.g.format},
        {"version", TOPAMP_VERSION},
        {"files", listed},
        {"started_utc", started},
        {"finished_utc", utc_now()},
        {"wall_clock_seconds", wall},
    };
    std::ofstream m(fs::path(run.g.out) / "manifest.json", std::ios::binary);
    m << manifest.dump(2) << "\n";
}

Table vector_table(const std::string& name, const SteadyState& st) {
    Table t{name, {"j", "re_alpha", "im_alpha", "log10_abs_alpha"}, {}};
    for (Eigen::Index j = 0; j < st.alpha.size(); ++j)
        t.add({static_cast<long long>(j + 1), st.alpha(j).real(), st.alpha(j).imag(), st.log10_abs(j)});
    return t;
}

Table spectrum_table(const SpectrumReport& sp) {
    Table t{"spectrum", {"n", "re_lambda", "im_lambda"}, {}};
    for (Eigen::Index n = 0; n < sp.eigenvalues.size(); ++n)
        t.add({static_cast<long long>(n + 1), sp.eigenvalues(n).real(), sp.eigenvalues(n).imag()});
    return t;
}

json strings(const std::vector<std::string>& v) {
    return json(v);
}

// ---------------------------------------------------------------- commands

void cmd_model(Run& run, const std::string& action) {
    load_config(run, true);
    const LatticeModel m = load_model(run);
    if (action == "build") {
        run.documents.emplace_back("model", io::model_to_json(m));
        return;
    }
    const CouplingMatrix cm = coupling_matrix(m);
    json info = {
        {"n_sites", m.n_sites()},
        {"digest", io::model_digest(m)},
        {"hermiticity_defect",
         {{"gamma_pump", hermiticity_defect(m.gamma_pump())},
          {"gamma_decay", hermiticity_defect(m.gamma_decay())},
          {"coherent", hermiticity_defect(m.coherent())}}},
        {"min_eigenvalue", {{"gamma_pump", smallest_eigenvalue(m.gamma_pump())},
                            {"gamma_decay", smallest_eigenvalue(m.gamma_decay())}}},
        {"parity_defect", parity_defect(cm.h)},
        {"h", io::matrix_to_json(cm.h)},
        {"warnings", strings(m.warnings())},
    };
    run.documents.emplace_back("inspect", info);
}

void cmd_svd(Run& run) {
    load_config(run, true);
    const CouplingMatrix cm = coupling_matrix(load_model(run));
    const SvdResult r = svd(cm);
    const EdgeRefinement e = refine_edge_singular_value(cm, r);
    Table t{"svd", {"n", "j", "s_n", "re_u", "im_u", "re_v", "im_v"}, {}};
    for (Eigen::Index n = 0; n < r.size(); ++n)
        for (Eigen::Index j = 0; j < r.size(); ++j)
            t.add({static_cast<long long>(n + 1), static_cast<long long>(j + 1), r.s(n), r.u(j, n).real(),
                   r.u(j, n).imag(), r.v(j, n).real(), r.v(j, n).imag()});
    run.tables.push_back(std::move(t));
    json summary = {{"s_1", r.largest()},
                    {"s_N", r.smallest()},
                    {"s_N_refined", e.s_edge},
                    {"log10_s_N_refined", e.log10_s_edge},
                    {"numerically_zero", r.edge_is_numerically_zero()}};
    if (r.size() >= 2) summary["gap"] = singular_gap(r);
    run.documents.emplace_back("svd_summary", summary);
}

void cmd_steady(Run& run, const std::string& method, bool truncate, const std::string& form_name) {
    load_config(run, true);
    SteadyState st;
    if (method == "ssh") {
        const ChainParams p = load_chain(run, "steady --method ssh");
        st = ssh_analytic_steady_state(p.t_d, p.gamma_p, p.n_sites, io::drive_from_json(run.config, p.n_sites));
    } else {
        const CouplingMatrix cm = coupling_matrix(load_model(run));
        const Drive d = io::drive_from_json(run.config, cm.size());
        if (method == "svd") st = steady_state_svd(cm, d, truncate ? SvdPolicy::truncated : SvdPolicy::full);
        else if (method == "direct") st = steady_state_direct(cm, d);
        else {
            const EdgeForm form = form_name == "general"     ? EdgeForm::general
                                  : form_name == "automatic" ? EdgeForm::automatic
                                                             : EdgeForm::parity;
            st = edge_rank1(cm, d, form);
        }
    }
    run.tables.push_back(vector_table("steady", st));
    json summary = {{"method", to_string(st.method)},
                    {"residual", std::isfinite(st.residual) ? json(st.residual) : json(nullptr)},
                    {"warnings", strings(st.warnings)}};
    if (st.method == SteadyMethod::edge_rank1 || st.method == SteadyMethod::ssh_analytic)
        summary["log10_amplification"] = st.log10_amplification;
    if (!st.form.empty()) summary["form"] = st.form;
    for (const auto& w : st.warnings) std::cerr << "topamp: warning: " << w << "\n";
    run.documents.emplace_back("steady_summary", summary);
}

BlochModel load_bloch(Run& run) {
    if (run.config.contains("bloch")) {
        auto series = [](const json& j, const char* name) {
            FourierSeries f;
            if (!j.is_array()) throw ModelError(std::string("bloch.") + name + ": expected [[d, c], ...]");
            for (const json& term : j) {
                if (!term.is_array() || term.size() != 2) throw ModelError("bloch terms are [offset, coefficient]");
                f.terms.emplace_back(term[0].get<int>(), io::complex_from_json(term[1]));
            }
            return f;
        };
        const json& b = run.config["bloch"];
        return BlochModel(series(b.value("gamma", json::array()), "gamma"), series(b.value("g", json::array()), "g"));
    }
    return bloch_from_chain(load_chain(run, "winding/classify"));
}

void cmd_winding(Run& run, int k_points) {
    load_config(run, true);
    const int nu = winding_number(load_bloch(run), k_points);
    run.text = std::to_string(nu) + "\n";
    if (!run.g.out.empty()) run.documents.emplace_back("winding", json{{"winding", nu}, {"k_points", k_points}});
}

void cmd_classify(Run& run, int k_points) {
    load_config(run, true);
    const BlochModel b = load_bloch(run);
    const SymmetryClass sc = classify_symmetry(b);
    json rep = {{"class", sc.label}, {"gap_min", bloch_gap(b, k_points).min_radius}};
    try {
        rep["winding"] = winding_number(b, k_points);
    } catch (const NumericalError& e) {
        if (e.code() != error_code::gapless) throw;
        rep["winding"] = nullptr;
    }
    if (sc.theta) rep["theta"] = *sc.theta;
    run.documents.emplace_back("classify", rep);
}

void cmd_stability(Run& run, bool analytic) {
    load_config(run, true);
    SpectrumReport sp;
    json rep;
    if (analytic) {
        const ChainParams p = load_chain(run, "stability --analytic");
        sp = spectrum_open_analytic(p);
        rep["threshold_gamma_p"] = stability_threshold(p.t_c, p.t_d, p.phi);
        rep["window_infinite_n"] = p.gamma_p < stability_threshold(p.t_c, p.t_d, p.phi);
        rep["topological"] = topological_window_1d(p.t_c, p.t_d, p.gamma_p, p.phi);
    } else {
        sp = spectrum_numeric(coupling_matrix(load_model(run)));
    }
    rep["max_real"] = sp.max_real;
    rep["stable"] = sp.stable;
    rep["method"] = analytic ? "analytic" : "numeric";
    run.tables.push_back(spectrum_table(sp));
    run.documents.emplace_back("stability", rep);
}

Table matrix_table(const std::string& name, const Matrix& m) {
    Table t{name, {"j", "l", "re", "im"}, {}};
    for (Eigen::Index j = 0; j < m.rows(); ++j)
        for (Eigen::Index l = 0; l < m.cols(); ++l)
            t.add({static_cast<long long>(j + 1), static_cast<long long>(l + 1), m(j, l).real(), m(j, l).imag()});
    return t;
}

void cmd_lyapunov(Run& run) {
    load_config(run, true);
    const LatticeModel m = load_model(run);
    const CorrelationMatrix c = lyapunov_steady(coupling_matrix(m), m.gamma_pump());
    run.tables.push_back(matrix_table("correlations", c.m));
    Table occ{"occupations", {"j", "n_j"}, {}};
    for (Eigen::Index j = 0; j < c.m.rows(); ++j) occ.add({static_cast<long long>(j + 1), c.m(j, j).real()});
    run.tables.push_back(std::move(occ));
    run.documents.emplace_back("lyapunov", json{{"residual", c.residual}, {"total_photons", c.m.trace().real()}});
}

void cmd_evolve(Run& run, const std::string& kind, double dt, double t_final, long stride, bool diag_only) {
    load_config(run, true);
    const LatticeModel m = load_model(run);
    const CouplingMatrix cm = coupling_matrix(m);
    const Eigen::Index n = cm.size();
    Table t{"trajectory", {"t"}, {}};
    if (kind == "coherences") {
        const Drive d = io::drive_from_json(run.config, n);
        Vector a0 = run.config.contains("alpha0") ? io::vector_from_json(run.config["alpha0"], "alpha0")
                                                  : Vector::Zero(n);
        if (a0.size() != n) throw ModelError("alpha0 length does not match N");
        const CoherenceTrajectory tr = evolve_coherences(cm, d, a0, dt, t_final, stride);
        for (Eigen::Index j = 1; j <= n; ++j) {
            if (diag_only) t.header.push_back("n_" + std::to_string(j));
            else {
                t.header.push_back("re_alpha_" + std::to_string(j));
                t.header.push_back("im_alpha_" + std::to_string(j));
            }
        }
        for (std::size_t i = 0; i < tr.t.size(); ++i) {
            std::vector<Cell> row{tr.t[i]};
            for (Eigen::Index j = 0; j < n; ++j) {
                const cplx a = tr.alpha[i](j);
                if (diag_only) row.push_back(std::norm(a));
                else {
                    row.push_back(a.real());
                    row.push_back(a.imag());
                }
            }
            t.add(std::move(row));
        }
        run.tables.push_back(std::move(t));
        return;
    }
    if (kind != "correlations") throw ModelError("--kind must be coherences or correlations");
    std::optional<Matrix> m0;
    if (run.config.contains("m0")) m0 = io::matrix_from_json(run.config["m0"], "m0");
    const CorrelationTrajectory tr = evolve_correlations(cm, m.gamma_pump(), m0, dt, t_final, stride);
    for (Eigen::Index j = 1; j <= n; ++j) {
        if (diag_only) {
            t.header.push_back("n_" + std::to_string(j));
            continue;
        }
        for (Eigen::Index l = 1; l <= n; ++l) {
            t.header.push_back("re_m_" + std::to_string(j) + "_" + std::to_string(l));
            t.header.push_back("im_m_" + std::to_string(j) + "_" + std::to_string(l));
        }
    }
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        std::vector<Cell> row{tr.t[i]};
        for (Eigen::Index j = 0; j < n; ++j) {
            if (diag_only) {
                row.push_back(tr.m[i](j, j).real());
                continue;
            }
            for (Eigen::Index l = 0; l < n; ++l) {
                row.push_back(tr.m[i](j, l).real());
                row.push_back(tr.m[i](j, l).imag());
            }
        }
        t.add(std::move(row));
    }
    run.tables.push_back(std::move(t));
    run.documents.emplace_back("evolve", json{{"max_hermiticity_deviation", tr.max_hermiticity_deviation}});
}

std::vector<double> number_list(const Run& run, const char* key, std::vector<double> fallback) {
    if (!run.config.contains(key)) return fallback;
    try {
        return run.config[key].get<std::vector<double>>();
    } catch (const json::exception&) {
        throw ModelError(std::string("'") + key + "' must be a list of numbers");
    }
}

void cmd_fig1(Run& run) {
    load_config(run, false);
    ChainParams base{1.0, 1.0, 1.0, pi / 3.0, 50};
    if (run.config.contains("chain")) base = io::chain_from_json(run.config["chain"]);
    const std::vector<double> profiles = number_list(run, "profile_gamma_p", {1.0, 0.0});
    const std::vector<double> inset = number_list(run, "inset_gamma_p", {0.0, 1.0, 1.5, 2.0});

    Table prof{"profiles", {"gamma_p", "j", "abs_u_N", "abs_v_N"}, {}};
    json summary = json::array();
    for (double g : profiles) {
        ChainParams p = base;
        p.gamma_p = g;
        const EdgeProfile e = edge_profile_experiment(p);
        for (Eigen::Index j = 0; j < e.u_abs.size(); ++j)
            prof.add({g, static_cast<long long>(j + 1), e.u_abs(j), e.v_abs(j)});
        const LinearFit fit = edge_decay_fit(e.v_abs, std::min<int>(20, p.n_sites));
        summary.push_back({{"gamma_p", g},
                           {"s_1", e.s(0)},
                           {"s_N", e.s_edge},
                           {"s_N_over_s_1", e.s_edge / e.s(0)},
                           {"gap", e.gap},
                           {"min_s", e.s.minCoeff()},
                           {"v_decay_slope", fit.slope},
                           {"v_decay_r2", fit.r2},
                           {"winding_window", topological_window_1d(p.t_c, p.t_d, p.gamma_p, p.phi)}});
    }
    Table sv{"singular_values", {"gamma_p", "n", "s_n"}, {}};
    for (double g : inset) {
        ChainParams p = base;
        p.gamma_p = g;
        const EdgeProfile e = edge_profile_experiment(p);
        for (Eigen::Index n = 0; n < e.s.size(); ++n) {
            const double s = n + 1 == e.s.size() ? e.s_edge : e.s(n);
            sv.add({g, static_cast<long long>(n + 1), s});
        }
    }
    run.tables.push_back(std::move(prof));
    run.tables.push_back(std::move(sv));
    run.documents.emplace_back("fig1_summary", summary);
}

AxisSpec axis_from(const json& j, AxisSpec fallback) {
    if (j.is_null()) return fallback;
    AxisSpec a = fallback;
    a.name = io::get_or(j, "name", a.name);
    a.lo = io::get_or(j, "lo", a.lo);
    a.hi = io::get_or(j, "hi", a.hi);
    a.count = io::get_or(j, "count", a.count);
    return a;
}

void phase_tables(Run& run, const PhaseDiagram& pd, const std::string& name) {
    Table t{name, {pd.axis1.name, pd.axis2.name, "delta_s", "winding", "stable", "max_real"}, {}};
    auto axis_value = [](const ChainParams& p, const std::string& a) {
        return a == "t_d" ? p.t_d : a == "gamma_p" ? p.gamma_p : a == "phi" ? p.phi : p.t_c;
    };
    for (const PhasePoint& pt : pd.points) {
        t.add({axis_value(pt.params, pd.axis1.name), axis_value(pt.params, pd.axis2.name), pt.delta_s,
               pt.winding ? Cell(static_cast<long long>(*pt.winding)) : Cell(std::string("gapless")),
               static_cast<long long>(pt.stable), pt.max_real});
    }
    run.tables.push_back(std::move(t));
    if (!pd.overlays.empty()) {
        Table o{"overlays", {"curve", "x", "gamma_p"}, {}};
        for (const Polyline& line : pd.overlays)
            for (const auto& [x, y] : line.points) o.add({line.name, x, y});
        run.tables.push_back(std::move(o));
    }
}

void cmd_fig2(Run& run, const std::string& panel) {
    load_config(run, false);
    ChainParams fixed{1.0, 1.0, 0.0, pi / 2.0, 100};
    AxisSpec a1, a2;
    if (panel == "a") {
        a1 = {"t_d", 0.0, 2.0, 100};
        a2 = {"gamma_p", -1.0, 5.0, 100};
    } else {
        a1 = {"phi", 0.0, pi, 100};
        a2 = {"gamma_p", -1.0, 5.0, 100};
    }
    if (run.config.contains("chain")) fixed = io::chain_from_json(run.config["chain"]);
    a1 = axis_from(run.config.value("axis1", json()), a1);
    a2 = axis_from(run.config.value("axis2", json()), a2);
    const int n = cfg(run, "n", fixed.n_sites == 2 ? 100 : fixed.n_sites);
    phase_tables(run, phase_diagram(a1, a2, fixed, n, run.threads()), "phase_" + panel);
}

void cmd_fig3(Run& run) {
    load_config(run, false);
    ChainParams base{1.0, 1.0, 1.0, pi / 2.0, 2};
    if (run.config.contains("chain")) base = io::chain_from_json(run.config["chain"]);
    std::vector<double> sigmas;
    for (int i = 0; i <= 10; ++i) sigmas.push_back(0.1 * i);
    sigmas = number_list(run, "sigmas", sigmas);
    std::vector<int> ns{25, 50, 100};
    if (run.config.contains("n_list")) ns = run.config["n_list"].get<std::vector<int>>();
    const int realizations = cfg(run, "realizations", 0);
    const std::uint64_t master = run.seed(cfg<std::uint64_t>(run, "master_seed", 0));
    run.seeds.push_back(master);
    const auto stats = disorder_experiment(base, sigmas, ns, master, run.threads(), realizations);
    Table t{"disorder",
            {"sigma", "n", "realizations", "mean_gap", "stderr_gap", "mean_log10_gain_site_n",
             "stderr_log10_gain", "gain_fallbacks"},
            {}};
    for (const DisorderStats& s : stats)
        t.add({s.sigma, static_cast<long long>(s.n_sites), static_cast<long long>(s.realizations), s.mean_gap,
               s.stderr_gap, s.mean_log_gain, s.stderr_log_gain, static_cast<long long>(s.gain_fallbacks)});
    run.tables.push_back(std::move(t));
}

FloquetParams floquet_from(const Run& run) {
    if (!run.config.contains("floquet")) throw ModelError("floquet commands need a 'floquet' config");
    const json& f = run.config["floquet"];
    FloquetParams fp;
    fp.omega = io::get_or(f, "omega", fp.omega);
    fp.delta_omega = io::get_or(f, "delta_omega", fp.delta_omega);
    fp.g0 = io::get_or(f, "g0", fp.g0);
    fp.phi_d = io::get_or(f, "phi_d", fp.phi_d);
    fp.gbar0 = io::get_or(f, "gbar0", fp.gbar0);
    fp.kappa_a = io::get_or(f, "kappa_a", fp.kappa_a);
    fp.kappa_b = io::get_or(f, "kappa_b", fp.kappa_b);
    return fp;
}

void cmd_floquet(Run& run, const std::string& action) {
    load_config(run, true);
    const FloquetParams fp = floquet_from(run);
    const int n = cfg(run, "n", 10);
    if (action == "map") {
        const ChainParams p = map_params(fp, n);
        json out = io::chain_to_json(p);
        out["stable_infinite_n"] = p.gamma_p < stability_threshold(p.t_c, p.t_d, p.phi);
        out["topological"] = topological_window_1d(p.t_c, p.t_d, p.gamma_p, p.phi);
        run.documents.emplace_back("floquet_map", out);
    } else if (action == "check") {
        const HierarchyReport rep = check_hierarchy(fp);
        json checks = json::array();
        for (const auto& c : rep.checks)
            checks.push_back({{"relation", c.relation},
                              {"small", c.small},
                              {"large", c.large},
                              {"ratio", std::isfinite(c.ratio) ? json(c.ratio) : json("inf")},
                              {"pass", c.pass},
                              {"degenerate", c.degenerate}});
        run.documents.emplace_back("floquet_check",
                                   json{{"pass", rep.pass}, {"degenerate", rep.degenerate}, {"checks", checks}});
    } else {
        const EliminationReport rep = validate_elimination(fp, n, io::drive_from_json(run.config, n));
        json series = json::array();
        for (const auto& p : rep.series)
            series.push_back({{"kappa_b", p.kappa_b},
                              {"gbar0", p.gbar0},
                              {"error", p.error},
                              {"probe_error", p.probe_error}});
        run.documents.emplace_back("floquet_validate", json{{"error", rep.error},
                                                            {"probe_error", rep.probe_error},
                                                            {"t_probe", rep.t_probe},
                                                            {"series", series}});
    }
}

void cmd_sweep(Run& run) {
    load_config(run, true);
    ChainParams fixed;
    if (run.config.contains("chain")) fixed = io::chain_from_json(run.config["chain"]);
    if (!run.config.contains("axis1")) throw ModelError("sweep needs 'axis1' (and optionally 'axis2')");
    const AxisSpec a1 = axis_from(run.config["axis1"], {"gamma_p", 0.0, 1.0, 2});
    const int n = cfg(run, "n", fixed.n_sites);
    if (run.config.contains("axis2")) {
        const AxisSpec a2 = axis_from(run.config["axis2"], {"phi", 0.0, pi, 2});
        phase_tables(run, phase_diagram(a1, a2, fixed, n, run.threads()), "sweep");
        return;
    }
    if (a1.count < 2) throw ModelError("axis1 needs at least 2 points");
    std::vector<PhasePoint> pts(a1.count);
    ChainParams probe;
    set_axis(probe, a1.name, 0.0);
    detail::parallel_for(pts.size(), run.threads(), [&](std::size_t i) {
        ChainParams p = fixed;
        p.n_sites = n;
        set_axis(p, a1.name, a1.value(static_cast<int>(i)));
        pts[i] = phase_point(p);
    });
    Table t{"sweep", {a1.name, "delta_s", "winding", "stable", "max_real"}, {}};
    for (std::size_t i = 0; i < pts.size(); ++i)
        t.add({a1.value(static_cast<int>(i)), pts[i].delta_s,
               pts[i].winding ? Cell(static_cast<long long>(*pts[i].winding)) : Cell(std::string("gapless")),
               static_cast<long long>(pts[i].stable), pts[i].max_real});
    run.tables.push_back(std::move(t));
}

std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

int fail(int code, const std::string& kind, const std::string& msg) {
    std::cerr << "topamp: error exit=" << code << " code=" << kind << " message=" << json(one_line(msg)).dump()
              << "\n";
    return code;
}

} // namespace

int main(int argc, char** argv) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string started = utc_now();
    Run run;
    for (int i = 0; i < argc; ++i) run.argv.emplace_back(argv[i]);

    CLI::App app{"Topological amplification in dissipative lattices", "topamp"};
    app.set_version_flag("--version", TOPAMP_VERSION);
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--config", run.g.config, "JSON configuration");
    app.add_option("--out", run.g.out, "output directory (stdout when omitted)");
    app.add_option("--seed", run.g.seed, "master seed");
    app.add_option("--format", run.g.format, "table format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--threads", run.g.threads, "worker threads (TOPAMP_THREADS)")->check(CLI::PositiveNumber);

    auto* model = app.add_subcommand("model", "build or inspect a model");
    std::string model_action = "build";
    model->add_option("action", model_action)->check(CLI::IsMember({"build", "inspect"}));

    auto* svd_cmd = app.add_subcommand("svd", "singular value decomposition of H");

    auto* steady = app.add_subcommand("steady", "steady-state coherences");
    std::string method = "direct", edge_form = "parity";
    bool truncate = false;
    steady->add_option("--method", method)->check(CLI::IsMember({"svd", "direct", "edge", "ssh"}));
    steady->add_flag("--truncate", truncate, "drop singular values below the floor");
    steady->add_option("--edge-form", edge_form)->check(CLI::IsMember({"parity", "general", "automatic"}));

    int k_points = 1024;
    auto* winding = app.add_subcommand("winding", "winding number of the Bloch curve");
    winding->add_option("--k-points", k_points)->check(CLI::Range(8, 1 << 22));
    auto* classify = app.add_subcommand("classify", "symmetry class, winding and gap");
    classify->add_option("--k-points", k_points)->check(CLI::Range(8, 1 << 22));

    auto* stability = app.add_subcommand("stability", "spectrum and stability of H");
    bool analytic = false, numeric = false;
    auto* fa = stability->add_flag("--analytic", analytic, "open-chain closed form");
    auto* fn = stability->add_flag("--numeric", numeric, "dense eigensolver");
    fa->excludes(fn);

    auto* lyap = app.add_subcommand("lyapunov", "steady-state correlation matrix");

    auto* evolve = app.add_subcommand("evolve", "time evolution of moments");
    std::string kind = "coherences";
    double dt = 0.01, t_final = 1.0;
    long stride = 1;
    bool diag_only = false;
    evolve->add_option("--kind", kind)->check(CLI::IsMember({"coherences", "correlations"}));
    evolve->add_option("--dt", dt);
    evolve->add_option("--t-final", t_final);
    evolve->add_option("--stride", stride)->check(CLI::PositiveNumber);
    evolve->add_flag("--diag-only", diag_only, "only occupations n_j");

    auto* fig1 = app.add_subcommand("fig1", "edge singular vectors and singular values");
    auto* fig2 = app.add_subcommand("fig2", "phase diagram");
    std::string panel = "b";
    fig2->add_option("--panel", panel)->check(CLI::IsMember({"a", "b"}));
    auto* fig3 = app.add_subcommand("fig3", "disorder averages");

    auto* floquet = app.add_subcommand("floquet", "driven two-array implementation");
    std::string floquet_action = "map";
    floquet->add_option("action", floquet_action)->required()->check(CLI::IsMember({"map", "check", "validate"}));

    auto* sweep = app.add_subcommand("sweep", "parameter sweep of gap, winding and stability");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(1, "usage", e.what());
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        run.command = sub->get_name();
        if (sub == model) cmd_model(run, model_action);
        else if (sub == svd_cmd) cmd_svd(run);
        else if (sub == steady) cmd_steady(run, method, truncate, edge_form);
        else if (sub == winding) cmd_winding(run, k_points);
        else if (sub == classify) cmd_classify(run, k_points);
        else if (sub == stability) cmd_stability(run, analytic);
        else if (sub == lyap) cmd_lyapunov(run);
        else if (sub == evolve) cmd_evolve(run, kind, dt, t_final, stride, diag_only);
        else if (sub == fig1) cmd_fig1(run);
        else if (sub == fig2) cmd_fig2(run, panel);
        else if (sub == fig3) cmd_fig3(run);
        else if (sub == floquet) cmd_floquet(run, floquet_action);
        else if (sub == sweep) cmd_sweep(run);
        emit(run, t0, started);
    } catch (const NumericalError& e) {
        return fail(2, e.code(), e.what());
    } catch (const ModelError& e) {
        return fail(1, "invalid-input", e.what());
    } catch (const json::exception& e) {
        return fail(1, "invalid-input", e.what());
    } catch (const fs::filesystem_error& e) {
        return fail(1, "io", e.what());
    }
    return 0;
}
