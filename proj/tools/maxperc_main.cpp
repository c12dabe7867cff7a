// Command-line experiment runner: every estimator and oracle of the
// library behind one binary with seeded, reproducible runs.
//
// Exit codes: 0 success, 2 usage error, 3 domain error.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "maxperc/dependence.hpp"
#include "maxperc/maxlinear.hpp"
#include "maxperc/oracle.hpp"
#include "maxperc/percolation.hpp"
#include "maxperc/subdag_io.hpp"

using namespace maxperc;
using nlohmann::ordered_json;

namespace {

// ----------------------------------------------------------------------
// Formatting helpers (outputs must be byte-identical across reruns).
// ----------------------------------------------------------------------

// Shortest decimal that round-trips; deterministic across runs.
std::string fmt(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot open output file " + out_path);
    f << text;
}

// ----------------------------------------------------------------------
// Flag value parsing.
// ----------------------------------------------------------------------

Node parse_node_flag(const std::string& s) {
    int x = 0, y = 0;
    char extra = 0;
    if (std::sscanf(s.c_str(), "%d,%d%c", &x, &y, &extra) != 2)
        throw CLI::ValidationError("expected x,y but got '" + s + "'");
    return Node{x, y};
}

// "a:b:step" inclusive grid, or a single value.
std::vector<double> parse_grid(const std::string& s) {
    double a = 0, b = 0, step = 0;
    char extra = 0;
    if (std::sscanf(s.c_str(), "%lf:%lf:%lf%c", &a, &b, &step, &extra) == 3) {
        if (step <= 0) throw CLI::ValidationError("grid step must be positive");
        std::vector<double> grid;
        for (int k = 0;; ++k) {
            double v = a + k * step;
            if (v > b + 1e-12) break;
            grid.push_back(v);
        }
        return grid;
    }
    double v = 0;
    if (std::sscanf(s.c_str(), "%lf%c", &v, &extra) == 1) return {v};
    throw CLI::ValidationError("expected value or a:b:step, got '" + s + "'");
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stoi(tok));
    }
    if (out.empty()) throw CLI::ValidationError("empty integer list");
    return out;
}

std::vector<Node> parse_node_list(const std::string& s) {
    std::vector<Node> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ';')) {
        if (tok.empty()) continue;
        out.push_back(parse_node_flag(tok));
    }
    if (out.empty()) throw CLI::ValidationError("empty node list");
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    if (out.empty()) throw CLI::ValidationError("empty value list");
    return out;
}

// ----------------------------------------------------------------------
// JSON config files mirroring the flags; command-line flags win.
// Top-level keys configure global options, nested objects configure the
// subcommand of the same name: {"depend": {"window": 29, "p": "0.4"}}.
// ----------------------------------------------------------------------

class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool,
                          std::string) const override {
        return "{}\n";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        ordered_json doc;
        try {
            input >> doc;
        } catch (const std::exception& e) {
            throw CLI::FileError(std::string("config is not valid JSON: ") +
                                 e.what());
        }
        std::vector<CLI::ConfigItem> items;
        flatten({}, doc, items);
        return items;
    }

private:
    static std::string scalar(const ordered_json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    }

    static void flatten(std::vector<std::string> parents,
                        const ordered_json& obj,
                        std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : obj.items()) {
            if (value.is_object()) {
                auto nested = parents;
                nested.push_back(key);
                flatten(nested, value, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array())
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            else
                item.inputs.push_back(scalar(value));
            items.push_back(item);
        }
    }
};

// ----------------------------------------------------------------------
// Shared options.
// ----------------------------------------------------------------------

struct CommonOpts {
    int window_side = 0;  // 0 = unset
    std::vector<int> window_rect;
    long trials = 10000;
    std::uint64_t seed = 1;
    int threads = 1;
    double alpha = 1.0;
    std::string out;
    std::string format = "csv";
    std::string dag_path;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_alpha = false) {
    cmd->add_option("--window", o.window_side,
                    "square window side length N (window [-(N-1)/2, (N-1)/2]^2)");
    cmd->add_option("--window-rect", o.window_rect,
                    "window corners x0,y0,x1,y1")
        ->delimiter(',')
        ->expected(4);
    cmd->add_option("--trials", o.trials, "Monte Carlo trials")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--threads", o.threads, "worker threads for trial loops")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "output path (default: stdout)");
    cmd->add_option("--format", o.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    if (with_alpha)
        cmd->add_option("--alpha", o.alpha, "Frechet shape parameter")
            ->check(CLI::PositiveNumber);
}

Window resolve_window(const CommonOpts& o, int default_side = 0) {
    if (!o.window_rect.empty()) {
        return Window(Node{o.window_rect[0], o.window_rect[1]},
                      Node{o.window_rect[2], o.window_rect[3]});
    }
    int side = o.window_side > 0 ? o.window_side : default_side;
    if (side <= 0)
        throw std::invalid_argument(
            "a window is required: pass --window N or --window-rect");
    return Window::centered(side);
}

std::string window_name(const Window& w) {
    if (w.width() == w.height() && w.lo().x == -((w.width() - 1) / 2) &&
        w.lo().x == w.lo().y)
        return std::to_string(w.width());
    return w.describe();
}

// ----------------------------------------------------------------------
// percolate
// ----------------------------------------------------------------------

struct PercolateOpts {
    CommonOpts common;
    int radius = 10;
    std::string p_spec = "0.5";
    std::string window_grid;
    bool oriented = false;
    bool two_point = false;
    bool cluster_stats = false;
    std::string ell = "2,0";
};

int run_percolate(const PercolateOpts& o) {
    // Windows to scan: one, or a growth grid as a truncation diagnostic.
    std::vector<Window> windows;
    if (o.window_grid.empty()) {
        windows.push_back(resolve_window(o.common, 61));
    } else {
        for (int side : parse_int_list(o.window_grid))
            windows.push_back(Window::centered(side));
    }
    std::vector<double> grid = parse_grid(o.p_spec);
    Node ell = parse_node_flag(o.ell);

    struct Row {
        double p;
        std::string estimator;
        std::string window;
        McEstimate est;
    };
    std::vector<Row> rows;
    for (const Window& w : windows) {
        std::string wname = window_name(w);
        for (double p : grid) {
            if (o.cluster_stats) {
                std::vector<double> s = sum_trials(
                    o.common.trials, o.common.threads, 2,
                    [&](long t, std::vector<double>& row) {
                        BondConfiguration cfg = sample_configuration(
                            w, p, o.common.seed, static_cast<std::uint64_t>(t));
                        double size = static_cast<double>(
                            open_cluster_mask(cfg, Node{0, 0}).count());
                        row[0] = size;
                        row[1] = size * size;
                    });
                rows.push_back({p, "mean_cluster_size", wname,
                                mean_estimate(s[0], s[1], o.common.trials,
                                              o.common.seed)});
            }
            if (o.oriented) {
                rows.push_back({p, "oriented_theta", wname,
                                estimate_oriented_theta(p, w, o.radius,
                                                        o.common.trials,
                                                        o.common.seed,
                                                        o.common.threads)});
            } else if (!o.cluster_stats || o.two_point) {
                rows.push_back({p, "theta", wname,
                                estimate_theta(p, w, o.radius, o.common.trials,
                                               o.common.seed,
                                               o.common.threads)});
            }
            if (o.two_point) {
                long hits = count_trials(
                    o.common.trials, o.common.threads, [&](long t) {
                        BondConfiguration cfg = sample_configuration(
                            w, p, o.common.seed, static_cast<std::uint64_t>(t));
                        return !joint_cluster(cfg, Node{0, 0}, ell).empty();
                    });
                rows.push_back({p, "two_point_connectivity", wname,
                                bernoulli_estimate(hits, o.common.trials,
                                                   o.common.seed)});
            }
        }
    }

    if (o.common.format == "json") {
        ordered_json doc = ordered_json::array();
        for (const auto& r : rows)
            doc.push_back({{"p", r.p},
                           {"estimator", r.estimator},
                           {"window", r.window},
                           {"radius", o.radius},
                           {"trials", r.est.trials},
                           {"value", r.est.value},
                           {"stderr", r.est.stderr_},
                           {"seed", r.est.seed}});
        write_output(doc.dump(2) + "\n", o.common.out);
    } else {
        std::string csv = "p,estimator,window,radius,trials,value,stderr,seed\n";
        for (const auto& r : rows)
            csv += fmt(r.p) + "," + r.estimator + "," + r.window + "," +
                   std::to_string(o.radius) + "," +
                   std::to_string(r.est.trials) + "," + fmt(r.est.value) +
                   "," + fmt(r.est.stderr_) + "," +
                   std::to_string(r.est.seed) + "\n";
        write_output(csv, o.common.out);
    }
    return 0;
}

// ----------------------------------------------------------------------
// critical
// ----------------------------------------------------------------------

struct CriticalOpts {
    CommonOpts common;
    std::string estimator = "theta";
    int radius = 25;
    double tolerance = 0.02;
    double theta0 = 0.02;
    std::string ell = "2,0";
};

int run_critical(const CriticalOpts& o) {
    Window w = resolve_window(o.common, 61);
    CriticalEstimator est = CriticalEstimator::Theta;
    if (o.estimator == "oriented") est = CriticalEstimator::OrientedTheta;
    else if (o.estimator == "two-point") est = CriticalEstimator::TwoPoint;
    else if (o.estimator != "theta")
        throw std::invalid_argument("unknown estimator " + o.estimator);

    CriticalBracket bracket = estimate_critical(
        est, w, o.radius, o.common.trials, o.tolerance, o.common.seed,
        o.theta0, parse_node_flag(o.ell), o.common.threads);

    if (o.common.format == "json") {
        ordered_json doc;
        doc["estimator"] = o.estimator;
        doc["window"] = window_name(w);
        doc["radius"] = o.radius;
        doc["trials_per_point"] = o.common.trials;
        doc["theta0"] = bracket.theta0;
        doc["seed"] = o.common.seed;
        doc["p_lo"] = bracket.lo;
        doc["p_hi"] = bracket.hi;
        doc["p_mid"] = bracket.mid();
        doc["monotone_warning"] = bracket.monotone_warning;
        ordered_json evals = ordered_json::array();
        for (const auto& [p, e] : bracket.evaluations)
            evals.push_back(
                {{"p", p}, {"value", e.value}, {"stderr", e.stderr_}});
        doc["evaluations"] = std::move(evals);
        write_output(doc.dump(2) + "\n", o.common.out);
    } else {
        std::string csv =
            "estimator,window,radius,trials,theta0,seed,p_lo,p_hi,p_mid\n";
        csv += o.estimator + "," + window_name(w) + "," +
               std::to_string(o.radius) + "," + std::to_string(o.common.trials) +
               "," + fmt(bracket.theta0) + "," + std::to_string(o.common.seed) +
               "," + fmt(bracket.lo) + "," + fmt(bracket.hi) + "," +
               fmt(bracket.mid()) + "\n";
        write_output(csv, o.common.out);
    }
    return 0;
}

// ----------------------------------------------------------------------
// depend
// ----------------------------------------------------------------------

struct DependOpts {
    CommonOpts common;
    std::string p_spec = "0.5";
    std::string distance_spec;
    std::string i_flag, j_flag;
    std::string window_grid;
    int margin = 0;
    bool diagonal = false;
    bool sigma_bound = false;
    bool box_stats = false;
    std::string n_grid = "4,8,16";
    std::string convention = "exclude";
};

int run_depend(const DependOpts& o) {
    std::vector<double> p_grid = parse_grid(o.p_spec);

    if (o.box_stats) {
        int distance = o.distance_spec.empty()
                           ? 2
                           : static_cast<int>(parse_grid(o.distance_spec)[0]);
        InverseCountConvention conv = o.convention == "zero"
                                          ? InverseCountConvention::Zero
                                          : InverseCountConvention::ExcludeEmpty;
        if (o.convention != "zero" && o.convention != "exclude")
            throw std::invalid_argument("--inverse-count-convention must be "
                                        "'exclude' or 'zero'");
        BoxStatsReport report = common_ancestor_box_stats(
            distance, p_grid.front(), parse_int_list(o.n_grid),
            o.common.trials, o.common.seed, conv, o.common.threads);
        if (o.common.format == "json") {
            ordered_json doc;
            doc["distance"] = report.distance;
            doc["p"] = report.p;
            doc["convention"] =
                conv == InverseCountConvention::Zero ? "zero" : "exclude";
            doc["seed"] = report.seed;
            ordered_json rows = ordered_json::array();
            for (const auto& r : report.rows)
                rows.push_back({{"n", r.n},
                                {"pairs", r.pairs},
                                {"contributing_trials", r.contributing_trials},
                                {"value", r.value},
                                {"stderr", r.stderr_},
                                {"empty_fraction", r.empty_fraction}});
            doc["rows"] = std::move(rows);
            write_output(doc.dump(2) + "\n", o.common.out);
        } else {
            std::string csv =
                "n,distance,p,pairs,contributing_trials,value,stderr,"
                "empty_fraction,trials,seed\n";
            for (const auto& r : report.rows)
                csv += std::to_string(r.n) + "," +
                       std::to_string(report.distance) + "," + fmt(report.p) +
                       "," + std::to_string(r.pairs) + "," +
                       std::to_string(r.contributing_trials) + "," +
                       fmt(r.value) + "," + fmt(r.stderr_) + "," +
                       fmt(r.empty_fraction) + "," +
                       std::to_string(o.common.trials) + "," +
                       std::to_string(o.common.seed) + "\n";
            write_output(csv, o.common.out);
        }
        return 0;
    }

    if (o.sigma_bound) {
        Window w = resolve_window(o.common, 21);
        Node i, j;
        if (!o.i_flag.empty() && !o.j_flag.empty()) {
            i = parse_node_flag(o.i_flag);
            j = parse_node_flag(o.j_flag);
        } else {
            int d = o.distance_spec.empty()
                        ? 2
                        : static_cast<int>(parse_grid(o.distance_spec)[0]);
            std::tie(i, j) = place_pair(d, o.diagonal);
        }
        SigmaBoundReport r = check_sigma_bound(
            i, j, p_grid.front(), w, o.common.trials, o.common.seed,
            o.common.threads);
        ordered_json doc;
        doc["i"] = {i.x, i.y};
        doc["j"] = {j.x, j.y};
        doc["p"] = p_grid.front();
        doc["window"] = window_name(w);
        doc["trials"] = o.common.trials;
        doc["seed"] = o.common.seed;
        doc["ancestor_prob"] = r.ancestor_prob.value;
        doc["ancestor_stderr"] = r.ancestor_prob.stderr_;
        doc["sigma_prob"] = r.sigma_prob.value;
        doc["sigma_stderr"] = r.sigma_prob.stderr_;
        doc["rhs"] = r.rhs;
        doc["margin"] = r.margin;
        doc["stderr_combined"] = r.stderr_combined;
        doc["pass"] = r.pass;
        write_output(doc.dump(2) + "\n", o.common.out);
        return 0;
    }

    // Pairwise / sweep estimation over one window or a growth grid.
    std::vector<Window> windows;
    if (o.window_grid.empty()) {
        windows.push_back(resolve_window(o.common, 0));
    } else {
        for (int side : parse_int_list(o.window_grid))
            windows.push_back(Window::centered(side));
    }

    struct Row {
        double p;
        int d;
        Node i, j;
        std::string window;
        int margin;
        McEstimate est;
    };
    std::vector<Row> rows;
    for (const Window& w : windows) {
        std::string wname = window_name(w);
        std::optional<EdgeMask> forced;
        if (!o.common.dag_path.empty()) {
            SubDag h = embed_subdag(load_subdag(o.common.dag_path), w);
            forced = h.edges;
        }
        if (!o.i_flag.empty() || !o.j_flag.empty()) {
            if (o.i_flag.empty() || o.j_flag.empty())
                throw std::invalid_argument(
                    "--i and --j must be given together");
            Node i = parse_node_flag(o.i_flag);
            Node j = parse_node_flag(o.j_flag);
            int margin =
                std::min(boundary_margin(w, i), boundary_margin(w, j));
            if (margin < o.margin)
                throw std::invalid_argument(
                    "pair margin " + std::to_string(margin) +
                    " below required --margin " + std::to_string(o.margin));
            for (double p : p_grid) {
                DependenceQuery q{i, j, w, p, o.common.trials, o.common.seed,
                                  forced};
                rows.push_back({p, delta(i, j), i, j, wname, margin,
                                estimate_dependence_probability(
                                    q, o.common.threads)});
            }
        } else {
            std::vector<int> distances = o.distance_spec.empty()
                                             ? std::vector<int>{2}
                                             : parse_int_list(o.distance_spec);
            if (forced)
                throw std::invalid_argument(
                    "--dag applies to explicit --i/--j queries only");
            SweepResult sweep = phase_sweep(p_grid, distances, w,
                                            o.common.trials, o.common.seed,
                                            o.diagonal, o.common.threads);
            for (const auto& r : sweep.rows) {
                if (r.margin < o.margin)
                    throw std::invalid_argument(
                        "sweep margin " + std::to_string(r.margin) +
                        " below required --margin " +
                        std::to_string(o.margin));
                rows.push_back(
                    {r.p, r.distance, r.i, r.j, wname, r.margin, r.estimate});
            }
        }
    }

    if (o.common.format == "json") {
        ordered_json doc = ordered_json::array();
        for (const auto& r : rows)
            doc.push_back({{"p", r.p},
                           {"d", r.d},
                           {"i", {r.i.x, r.i.y}},
                           {"j", {r.j.x, r.j.y}},
                           {"n_window", r.window},
                           {"estimate", r.est.value},
                           {"stderr", r.est.stderr_},
                           {"trials", r.est.trials},
                           {"seed", r.est.seed},
                           {"margin", r.margin}});
        write_output(doc.dump(2) + "\n", o.common.out);
    } else {
        std::string csv = "p,d,n_window,estimate,stderr,trials,seed,margin\n";
        for (const auto& r : rows)
            csv += fmt(r.p) + "," + std::to_string(r.d) + "," + r.window +
                   "," + fmt(r.est.value) + "," + fmt(r.est.stderr_) + "," +
                   std::to_string(r.est.trials) + "," +
                   std::to_string(r.est.seed) + "," +
                   std::to_string(r.margin) + "\n";
        write_output(csv, o.common.out);
    }
    return 0;
}

// ----------------------------------------------------------------------
// enlarge
// ----------------------------------------------------------------------

struct EnlargeOpts {
    CommonOpts common;
    std::string p_spec = "0.1:0.9:0.2";
    std::string window_grid = "11,21,41";
    std::string i_flag = "-2,0";
    std::string j_flag = "2,0";
    bool north_columns = false;
    bool use_wall = false;
    int wall_k1 = 0;
    std::string emit_sample;
};

int run_enlarge(const EnlargeOpts& o) {
    Node i = parse_node_flag(o.i_flag);
    Node j = parse_node_flag(o.j_flag);

    SubDagBuilder builder;
    if (!o.common.dag_path.empty()) {
        SubDag h = load_subdag(o.common.dag_path);
        builder = [h](const Window& w) { return embed_subdag(h, w); };
    } else if (o.north_columns) {
        builder = [](const Window& w) { return north_columns_subdag(w); };
    } else if (o.use_wall) {
        int k1 = o.wall_k1, i2 = i.y;
        builder = [k1, i2](const Window& w) {
            return wall_subdag(w, k1, i2);
        };
    } else {
        builder = [i, j](const Window& w) { return pair_subdag(w, i, j); };
    }

    if (!o.emit_sample.empty()) {
        Window w = resolve_window(o.common, 21);
        SubDag h = builder(w);
        validate_subdag(h);
        double p = parse_grid(o.p_spec).front();
        BondConfiguration cfg =
            sample_configuration(w, p, o.common.seed, 0, &h.edges);
        write_output(subdag_to_json(enlargement_subdag(h, cfg)) + "\n",
                     o.emit_sample);
        return 0;
    }

    EnlargementReport report = estimate_enlargement_criticals(
        builder, i, j, parse_grid(o.p_spec), parse_int_list(o.window_grid),
        o.common.trials, o.common.seed, o.common.threads);

    if (o.common.format == "json") {
        ordered_json doc;
        doc["i"] = {i.x, i.y};
        doc["j"] = {j.x, j.y};
        doc["trials"] = o.common.trials;
        doc["seed"] = o.common.seed;
        ordered_json rows = ordered_json::array();
        for (const auto& r : report.rows)
            rows.push_back({{"p", r.p},
                            {"window", r.window_side},
                            {"estimate", r.estimate.value},
                            {"stderr", r.estimate.stderr_}});
        doc["rows"] = std::move(rows);
        doc["p_c1_proxy"] = report.p_c1_proxy;
        doc["p_c2_proxy"] = report.p_c2_proxy;
        doc["caveat"] = report.caveat;
        write_output(doc.dump(2) + "\n", o.common.out);
    } else {
        std::string csv = "p,window,estimate,stderr,trials,seed\n";
        for (const auto& r : report.rows)
            csv += fmt(r.p) + "," + std::to_string(r.window_side) + "," +
                   fmt(r.estimate.value) + "," + fmt(r.estimate.stderr_) +
                   "," + std::to_string(r.estimate.trials) + "," +
                   std::to_string(o.common.seed) + "\n";
        write_output(csv, o.common.out);
    }
    return 0;
}

// ----------------------------------------------------------------------
// oracle
// ----------------------------------------------------------------------

struct OracleOpts {
    CommonOpts common;
    std::string event = "dependent";
    std::string i_flag = "0,1";
    std::string j_flag = "1,0";
    std::string p_spec;
};

int run_oracle(const OracleOpts& o) {
    Window w = resolve_window(o.common, 2);
    Node i = parse_node_flag(o.i_flag);
    Node j = parse_node_flag(o.j_flag);

    std::optional<EdgeMask> forced;
    ConfigEvent event;
    if (o.event == "dependent") {
        event = [i, j](const BondConfiguration& c) {
            return are_dependent(c, i, j);
        };
    } else if (o.event == "sigma") {
        event = [i, j](const BondConfiguration& c) {
            return sigma_event(c, i, j);
        };
    } else if (o.event == "enlarged-dependent") {
        SubDag h = o.common.dag_path.empty()
                       ? pair_subdag(w, i, j)
                       : embed_subdag(load_subdag(o.common.dag_path), w);
        forced = h.edges;
        event = [h, i, j](const BondConfiguration& c) {
            return are_dependent(restrict_to_enlargement(h, c), i, j);
        };
    } else {
        throw std::invalid_argument("unknown event " + o.event);
    }

    ExactResult res = exact_event_probability(
        w, event, forced ? &*forced : nullptr, o.common.threads);
    Polynomial poly = res.polynomial();

    ordered_json doc;
    doc["event"] = o.event;
    doc["window"] = window_name(w);
    doc["i"] = {i.x, i.y};
    doc["j"] = {j.x, j.y};
    doc["free_edges"] = res.free_edges;
    doc["polynomial"] = poly.pretty();
    doc["coefficients"] = poly.coeff;
    if (!o.p_spec.empty()) {
        ordered_json values = ordered_json::array();
        for (double p : parse_grid(o.p_spec))
            values.push_back({{"p", p}, {"value", res.at(p)}});
        doc["values"] = std::move(values);
    }
    if (o.common.format == "csv") {
        std::string csv = "event,window,free_edges,polynomial,p,value\n";
        std::string prefix = o.event + "," + window_name(w) + "," +
                             std::to_string(res.free_edges) + ",\"" +
                             poly.pretty() + "\"";
        if (o.p_spec.empty()) {
            csv += prefix + ",,\n";
        } else {
            for (double p : parse_grid(o.p_spec))
                csv += prefix + "," + fmt(p) + "," + fmt(res.at(p)) + "\n";
        }
        write_output(csv, o.common.out);
    } else {
        write_output(doc.dump(2) + "\n", o.common.out);
    }
    return 0;
}

// ----------------------------------------------------------------------
// maxlin
// ----------------------------------------------------------------------

struct MaxlinOpts {
    CommonOpts common;
    bool matrix = false;
    bool check_mw = false;
    long realize_count = 0;
    std::string targets_flag;
    std::string cdf_flag;
    std::string scale_flag;
    std::string extend_flag;
};

int run_maxlin(const MaxlinOpts& o) {
    if (o.common.dag_path.empty())
        throw std::invalid_argument("maxlin requires --dag PATH");
    WeightedDag dag = load_weighted_dag(o.common.dag_path);

    std::vector<Node> targets;
    if (!o.targets_flag.empty()) {
        targets = parse_node_list(o.targets_flag);
    } else {
        dag.window.for_each_node([&](Node n) { targets.push_back(n); });
    }

    if (o.matrix) {
        CoefficientMatrix m = coefficient_matrix(dag, targets);
        std::ostringstream os;
        write_matrix_csv(os, m);
        write_output(os.str(), o.common.out);
        return 0;
    }

    if (!o.extend_flag.empty()) {
        // "x,y:w" - extend with the free weight w on the new node.
        auto colon = o.extend_flag.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("--extend expects x,y:weight");
        Node n = parse_node_flag(o.extend_flag.substr(0, colon));
        double cv = std::stod(o.extend_flag.substr(colon + 1));
        WeightedDag ext = extend_max_weighted(dag, n, cv);
        write_output(weighted_dag_to_json(ext) + "\n", o.common.out);
        return 0;
    }

    if (o.check_mw) {
        MaxWeightedCheck check = is_max_weighted(dag);
        ordered_json doc;
        doc["max_weighted"] = check.ok;
        if (check.witness) {
            ordered_json wit;
            wit["from"] = {check.witness->from.x, check.witness->from.y};
            wit["to"] = {check.witness->to.x, check.witness->to.y};
            auto path_json = [](const std::vector<Node>& path) {
                ordered_json arr = ordered_json::array();
                for (Node n : path) arr.push_back({n.x, n.y});
                return arr;
            };
            wit["path_a"] = path_json(check.witness->path_a);
            wit["path_b"] = path_json(check.witness->path_b);
            wit["product_a"] = check.witness->product_a;
            wit["product_b"] = check.witness->product_b;
            doc["witness"] = std::move(wit);
        }
        write_output(doc.dump(2) + "\n", o.common.out);
        return 0;
    }

    if (!o.cdf_flag.empty() || !o.scale_flag.empty()) {
        CoefficientMatrix m = coefficient_matrix(dag, targets);
        ordered_json doc;
        if (!o.scale_flag.empty()) {
            Node n = parse_node_flag(o.scale_flag);
            doc["node"] = {n.x, n.y};
            doc["alpha"] = o.common.alpha;
            doc["scale"] = scale_parameter(m, n, o.common.alpha);
        } else {
            std::vector<double> x = parse_double_list(o.cdf_flag);
            if (x.size() != targets.size())
                throw std::invalid_argument(
                    "--cdf needs one value per target (give --targets)");
            doc["alpha"] = o.common.alpha;
            ordered_json tj = ordered_json::array();
            for (Node n : targets) tj.push_back({n.x, n.y});
            doc["targets"] = std::move(tj);
            doc["x"] = x;
            doc["cdf"] = joint_cdf(m, targets, x, o.common.alpha);
        }
        write_output(doc.dump(2) + "\n", o.common.out);
        return 0;
    }

    if (o.realize_count > 0) {
        std::string csv = "rep,i1,i2,value,noise,argmax_i1,argmax_i2\n";
        for (long rep = 0; rep < o.realize_count; ++rep) {
            Realization r = realize(dag, NoiseSpec{o.common.alpha},
                                    o.common.seed,
                                    static_cast<std::uint64_t>(rep));
            for (std::size_t idx = 0; idx < r.value.size(); ++idx) {
                Node n = dag.window.node_at(idx);
                Node src = dag.window.node_at(r.argmax_source[idx]);
                csv += std::to_string(rep) + "," + std::to_string(n.x) + "," +
                       std::to_string(n.y) + "," + fmt(r.value[idx]) + "," +
                       fmt(r.noise[idx]) + "," + std::to_string(src.x) + "," +
                       std::to_string(src.y) + "\n";
            }
        }
        write_output(csv, o.common.out);
        return 0;
    }

    throw std::invalid_argument(
        "maxlin: choose one of --matrix, --realize N, --cdf, --scale, "
        "--check-max-weighted, --extend");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Simulation and exact analysis of recursive max-linear models on "
        "Bernoulli bond percolation DAGs over the oriented square lattice"};
    app.require_subcommand(1);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "",
                   "JSON config file mirroring the flags, one object per "
                   "subcommand: {\"depend\": {\"window\": 29, ...}}; "
                   "command-line flags override the file");

    PercolateOpts perc;
    CLI::App* c_perc = app.add_subcommand(
        "percolate", "cluster statistics and shell-reaching estimates\n"
                     "CSV schema: p,estimator,window,radius,trials,value,"
                     "stderr,seed");
    add_common(c_perc, perc.common);
    c_perc->add_option("--radius", perc.radius, "shell radius for the "
                       "infinite-cluster proxy");
    c_perc->add_option("--p", perc.p_spec, "probability or grid a:b:step");
    c_perc->add_option("--p-grid", perc.p_spec, "grid a:b:step");
    c_perc->add_option("--window-grid", perc.window_grid,
                       "comma-separated window sides (truncation diagnostic)");
    c_perc->add_flag("--oriented", perc.oriented, "oriented clusters");
    c_perc->add_flag("--two-point", perc.two_point,
                     "two-point connectivity to --ell");
    c_perc->add_flag("--cluster-stats", perc.cluster_stats,
                     "mean cluster size of the origin");
    c_perc->add_option("--ell", perc.ell, "partner node for two-point runs");

    CriticalOpts crit;
    CLI::App* c_crit = app.add_subcommand(
        "critical", "bisection bracket for a critical probability\n"
                    "CSV schema: estimator,window,radius,trials,theta0,seed,"
                    "p_lo,p_hi,p_mid");
    add_common(c_crit, crit.common);
    c_crit->add_option("--estimator", crit.estimator,
                       "theta | oriented | two-point");
    c_crit->add_option("--radius", crit.radius, "shell radius");
    c_crit->add_option("--tolerance", crit.tolerance, "bracket width")
        ->check(CLI::PositiveNumber);
    c_crit->add_option("--theta0", crit.theta0,
                       "positivity threshold for the bisection");
    c_crit->add_option("--ell", crit.ell, "partner node for two-point runs");

    DependOpts dep;
    CLI::App* c_dep = app.add_subcommand(
        "depend", "pairwise dependence probabilities, sigma bound, sweeps, "
                  "box statistics\n"
                  "CSV schema: p,d,n_window,estimate,stderr,trials,seed,margin");
    add_common(c_dep, dep.common);
    c_dep->add_option("--p", dep.p_spec, "probability or grid a:b:step");
    c_dep->add_option("--p-grid", dep.p_spec, "grid a:b:step");
    c_dep->add_option("--window-grid", dep.window_grid,
                      "comma-separated window sides (truncation diagnostic)");
    c_dep->add_option("--distance", dep.distance_spec, "pair distance(s)");
    c_dep->add_option("--distance-grid", dep.distance_spec,
                      "comma-separated distances");
    c_dep->add_option("--i", dep.i_flag, "first node x,y");
    c_dep->add_option("--j", dep.j_flag, "second node x,y");
    c_dep->add_option("--margin", dep.margin,
                      "required distance of the pair from the boundary");
    c_dep->add_flag("--diagonal", dep.diagonal, "diagonal pair placement");
    c_dep->add_flag("--sigma-bound", dep.sigma_bound,
                    "report the common-ancestor lower bound check");
    c_dep->add_flag("--box-stats", dep.box_stats,
                    "common-ancestor box statistics");
    c_dep->add_option("--n-grid", dep.n_grid, "box sizes for --box-stats");
    c_dep->add_option("--inverse-count-convention", dep.convention,
                      "exclude | zero (1/0 handling in box statistics)");
    c_dep->add_option("--dag", dep.common.dag_path,
                      "sub-DAG JSON whose edges are forced open");

    EnlargeOpts enl;
    CLI::App* c_enl = app.add_subcommand(
        "enlarge", "cluster-enlargement experiments U(H) and critical "
                   "probability proxies\n"
                   "CSV schema: p,window,estimate,stderr,trials,seed");
    add_common(c_enl, enl.common);
    c_enl->add_option("--p", enl.p_spec, "probability or grid a:b:step");
    c_enl->add_option("--p-grid", enl.p_spec, "grid a:b:step");
    c_enl->add_option("--window-grid", enl.window_grid,
                      "comma-separated window sides");
    c_enl->add_option("--i", enl.i_flag, "first property node x,y");
    c_enl->add_option("--j", enl.j_flag, "second property node x,y");
    c_enl->add_option("--dag", enl.common.dag_path, "H as a sub-DAG JSON");
    c_enl->add_flag("--north-columns", enl.north_columns,
                    "H = all north edges of the window");
    c_enl->add_flag("--wall", enl.use_wall,
                    "H = all edges except two forbidden half-columns");
    c_enl->add_option("--wall-k1", enl.wall_k1,
                      "column flanked by the forbidden half-lines");
    c_enl->add_option("--emit-sample", enl.emit_sample,
                      "write one sampled U(H) as sub-DAG JSON to this path");

    OracleOpts ora;
    CLI::App* c_ora = app.add_subcommand(
        "oracle", "exact event probabilities by exhaustive enumeration "
                  "(<= 24 free edges)\n"
                  "CSV schema: event,window,free_edges,polynomial,p,value");
    add_common(c_ora, ora.common);
    c_ora->add_option("--event", ora.event,
                      "dependent | sigma | enlarged-dependent");
    c_ora->add_option("--i", ora.i_flag, "first node x,y");
    c_ora->add_option("--j", ora.j_flag, "second node x,y");
    c_ora->add_option("--p", ora.p_spec, "also evaluate numerically");
    c_ora->add_option("--dag", ora.common.dag_path,
                      "H for enlarged-dependent");

    MaxlinOpts ml;
    CLI::App* c_ml = app.add_subcommand(
        "maxlin", "coefficient matrices, realizations, CDF and max-weighted "
                  "tools on a weighted sub-DAG\n"
                  "CSV schemas: --matrix: j1,j2,i1,i2,b; "
                  "--realize: rep,i1,i2,value,noise,argmax_i1,argmax_i2");
    add_common(c_ml, ml.common, /*with_alpha=*/true);
    c_ml->add_option("--dag", ml.common.dag_path, "weighted DAG JSON")
        ->required();
    c_ml->add_flag("--matrix", ml.matrix, "emit coefficient CSV triplets");
    c_ml->add_option("--realize", ml.realize_count,
                     "emit N seeded realizations as CSV");
    c_ml->add_option("--targets", ml.targets_flag,
                     "semicolon-separated nodes x,y;x,y");
    c_ml->add_option("--cdf", ml.cdf_flag,
                     "evaluate the joint CDF at comma-separated x values");
    c_ml->add_option("--scale", ml.scale_flag,
                     "Frechet scale parameter of node x,y");
    c_ml->add_flag("--check-max-weighted", ml.check_mw,
                   "verify equal path products; report a witness otherwise");
    c_ml->add_option("--extend", ml.extend_flag,
                     "extend by node x,y:free_weight and emit the new DAG");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*c_perc) return run_percolate(perc);
        if (*c_crit) return run_critical(crit);
        if (*c_dep) return run_depend(dep);
        if (*c_enl) return run_enlarge(enl);
        if (*c_ora) return run_oracle(ora);
        if (*c_ml) return run_maxlin(ml);
    } catch (const std::invalid_argument& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 3;
    } catch (const std::out_of_range& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
