// isac: command-line front end for the frontier solvers, the radar
// estimator, typicality bounds and the simulators.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "isac/isac.hpp"

namespace {

using isac::json;

// Exit codes.
constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kInvalidModel = 2;
constexpr int kInfeasible = 3;

/// Shortest round-trip decimal form, independent of the C++ locale.
std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Quotes a CSV field when it contains a separator, quote or newline.
std::string csv_cell(const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) return v;
    std::string out = "\"";
    for (char c : v) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

struct Output {
    std::string format;
    std::string out_path;

    void emit(const std::string& text) const {
        if (out_path.empty()) std::cout << text << std::flush;
        else isac::write_file_atomically(out_path, text);
    }
};

/// CSV runs print the resolved configuration on stderr; JSON runs embed it.
void echo_config(const Output& o, const json& config) {
    if (o.format == "csv") std::cerr << "# config " << config.dump() << '\n';
}

// Loads and validates a model. Invalid models abort with exit code 2.
struct InvalidModel {
    isac::ValidationReport report;
};

isac::ProblemInstance load_valid(const std::string& path) {
    isac::ProblemInstance inst = isac::load_model(path);
    auto report = isac::validate_model(inst);
    if (!report.empty()) throw InvalidModel{std::move(report)};
    return inst;
}

void print_report(std::ostream& os, const isac::ValidationReport& report) {
    for (const auto& v : report) os << v.field << ": " << v.message << '\n';
}

std::string svg_plot(const std::vector<isac::FrontierPoint>& pts, const std::string& x_label) {
    constexpr double W = 640, H = 420, L = 70, R = 20, T = 20, B = 60;
    double x0 = pts.front().target, x1 = x0, y0 = 0.0, y1 = 0.0;
    for (const auto& p : pts) {
        x0 = std::min(x0, p.target), x1 = std::max(x1, p.target);
        y1 = std::max(y1, p.rate);
    }
    if (x1 <= x0) x1 = x0 + 1.0;
    if (y1 <= y0) y1 = y0 + 1.0;
    auto sx = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - R); };
    auto sy = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };

    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (const auto& p : pts) os << num(sx(p.target)) << ',' << num(sy(p.rate)) << ' ';
    os << "\"/>\n";
    auto text = [&](double x, double y, const std::string& s, const char* anchor, const char* extra = "") {
        os << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"12\" text-anchor=\"" << anchor << "\""
           << extra << ">" << s << "</text>\n";
    };
    text(L, H - B + 16, num(x0), "middle");
    text(W - R, H - B + 16, num(x1), "middle");
    text(L - 6, H - B + 4, num(y0), "end");
    text(L - 6, T + 4, num(y1), "end");
    text((L + W - R) / 2, H - 15, x_label, "middle");
    const std::string rot = " transform=\"rotate(-90 18 " + num((T + H - B) / 2) + ")\"";
    text(18, (T + H - B) / 2, "R [bits]", "middle", rot.c_str());
    os << "</svg>\n";
    return os.str();
}

// ---------------------------------------------------------------------------

int cmd_validate(const std::string& path, const Output& o) {
    const auto inst = isac::load_model(path);
    const auto report = isac::validate_model(inst);
    if (o.format == "json") {
        o.emit(json{{"model", path}, {"valid", report.empty()}, {"violations", isac::to_json(report)}}.dump(2) + "\n");
    } else if (report.empty()) {
        o.emit("valid\n");
    } else {
        std::ostringstream os;
        print_report(os, report);
        o.emit(os.str());
    }
    return report.empty() ? kOk : kInvalidModel;
}

int cmd_estimator(const std::string& path, const Output& o) {
    const auto inst = load_valid(path);
    if (!inst.distortion) throw isac::ModelError("distortion specification required");
    const auto& ch = inst.channel;
    const auto q = isac::posterior(ch, inst.p_s);
    const auto est = isac::optimal_estimator(q, *inst.distortion);
    const auto cost = isac::estimator_cost(ch, inst.p_s, *inst.distortion, est);
    const json config = {{"command", "estimator"}, {"model", path}, {"format", o.format}};
    echo_config(o, config);

    const auto& shat = inst.distortion->s_hat().labels;
    if (o.format == "json") {
        json rows = json::array();
        for (std::size_t x = 0; x < ch.nx(); ++x)
            for (std::size_t z = 0; z < ch.nz(); ++z)
                rows.push_back({{"x", ch.x().labels[x]}, {"z", ch.z().labels[z]}, {"s_hat", shat[est(x, z)]},
                                {"supported", q.supported(x, z)}});
        json costs = json::object();
        for (std::size_t x = 0; x < ch.nx(); ++x) costs[ch.x().labels[x]] = cost[x];
        o.emit(json{{"config", config}, {"estimator", rows}, {"cost", costs}}.dump(2) + "\n");
        return kOk;
    }
    std::string csv = "x,z,s_hat,supported,cost\n";
    for (std::size_t x = 0; x < ch.nx(); ++x)
        for (std::size_t z = 0; z < ch.nz(); ++z)
            csv += csv_cell(ch.x().labels[x]) + ',' + csv_cell(ch.z().labels[z]) + ',' + csv_cell(shat[est(x, z)]) + ',' +
                   (q.supported(x, z) ? "1" : "0") + ',' + num(cost[x]) + '\n';
    o.emit(csv);
    return kOk;
}

int cmd_frontier(const std::string& kind, const std::string& path, std::size_t points, const std::string& plot,
                 const Output& o) {
    if (points < 2) throw std::invalid_argument("--points must be >= 2");
    const auto inst = load_valid(path);
    const isac::SolverConfig cfg;
    const bool rd = kind == "rd";
    const auto pts = rd ? isac::rd_frontier(inst, points, cfg) : isac::re_frontier(inst, points, cfg);
    const json config = {{"command", "frontier " + kind}, {"model", path},   {"points", points},
                         {"format", o.format},           {"plot", plot},    {"solver", isac::to_json(cfg)}};
    echo_config(o, config);

    if (o.format == "json") {
        json arr = json::array();
        for (const auto& p : pts) arr.push_back(isac::to_json(p));
        o.emit(json{{"config", config}, {"points", arr}}.dump(2) + "\n");
    } else {
        std::string csv = rd ? "D,R" : "E,R";
        for (std::size_t x = 0; x < inst.channel.nx(); ++x) csv += ",px_" + std::to_string(x);
        csv += ",converged\n";
        for (const auto& p : pts) {
            csv += num(p.target) + ',' + num(p.rate);
            for (double v : p.p_x) csv += ',' + num(v);
            csv += p.converged ? ",1\n" : ",0\n";
        }
        o.emit(csv);
    }
    for (const auto& p : pts)
        if (p.clamped) {
            std::cerr << "warning: infinite per-input exponents clamped at " << num(cfg.kl_clamp) << " bits\n";
            break;
        }
    if (!plot.empty()) isac::write_file_atomically(plot, svg_plot(pts, rd ? "D" : "E [bits]"));
    return kOk;
}

void flatten_into(json& dst, const json& src, const std::string& prefix) {
    for (const auto& [k, v] : src.items()) {
        const std::string key = prefix.empty() ? k : prefix + "." + k;
        if (v.is_object()) flatten_into(dst, v, key);
        else if (!dst.contains(key)) dst[key] = v;
    }
}

/// Flat object: report fields first, then configuration keys not already
/// present (nested ones as dotted names).
std::string flat_report(const isac::SimulationReport& r, const json& config, const std::string& format) {
    json j = isac::to_json(r);
    flatten_into(j, config, "");
    if (format == "json") return j.dump(2) + "\n";
    std::string head, row;
    for (const auto& [k, v] : j.items()) {
        if (!head.empty()) head += ',', row += ',';
        head += k;
        if (v.is_number_float()) row += num(v.get<double>());
        else if (v.is_string()) row += csv_cell(v.get<std::string>());
        else if (v.is_array()) {
            std::string cell;
            for (const auto& e : v) cell += (cell.empty() ? "" : ";") + (e.is_number() ? num(e.get<double>()) : e.dump());
            row += cell;
        } else row += v.dump();
    }
    return head + "\n" + row + "\n";
}

std::vector<double> parse_pmf(const std::string& text, std::size_t expected) {
    std::vector<double> p;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        double v = 0.0;
        const auto res = std::from_chars(text.data() + start, text.data() + end, v);
        if (res.ec != std::errc() || res.ptr != text.data() + end)
            throw std::invalid_argument("--px must be a comma-separated list of numbers");
        p.push_back(v);
        start = end + 1;
    }
    if (p.size() != expected) throw std::invalid_argument("--px length does not match the x alphabet");
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) throw std::invalid_argument("--px entries must be >= 0");
        sum += v;
    }
    if (std::abs(sum - 1.0) > isac::kStochasticTol) throw std::invalid_argument("--px must sum to 1");
    return p;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Capacity-distortion and rate-exponent frontiers, radar estimation and simulation for ISAC channels"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "isac 1.0.0");

    Output out;
    std::string model;
    std::size_t points = 10, n = 0, trials = 0, workers = 1, cells = 0;
    double rate = 0.0, distortion = 0.0, alpha = 0.1, mu = 0.0, bin_width = 1e-9;
    std::optional<std::uint64_t> seed;
    std::string mode = "exact_dp", plot, px_text, codebook = "ensemble";

    auto add_output = [&](CLI::App* sub, const std::string& default_format) {
        out.format = default_format;
        sub->add_option("--format", out.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--out", out.out_path, "Write results to this path instead of stdout");
        // Defaults depend on which subcommand ran.
        sub->preparse_callback([&out, default_format](std::size_t) { out.format = default_format; });
    };

    auto* validate = app.add_subcommand("validate", "Check a model file");
    validate->add_option("model", model, "Model file")->required();
    add_output(validate, "csv");

    auto* estimator = app.add_subcommand("estimator", "Optimal per-symbol state estimator and its per-input cost");
    estimator->add_option("model", model, "Model file")->required();
    add_output(estimator, "csv");

    auto* frontier = app.add_subcommand("frontier", "Trade-off frontiers");
    frontier->require_subcommand(1);
    std::vector<CLI::App*> frontier_kinds;
    for (const char* kind : {"rd", "re"}) {
        auto* sub = frontier->add_subcommand(kind, std::string(kind) == "rd" ? "Capacity-distortion frontier"
                                                                             : "Rate-exponent frontier");
        sub->add_option("model", model, "Model file")->required();
        sub->add_option("--points", points, "Number of frontier points")->capture_default_str();
        sub->add_option("--plot", plot, "Also draw the frontier as SVG");
        add_output(sub, "csv");
        frontier_kinds.push_back(sub);
    }

    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo and exact finite-length experiments");
    simulate->require_subcommand(1);
    auto* sim_rd = simulate->add_subcommand("rd", "Random coding with ML decoding and per-symbol estimation");
    sim_rd->add_option("model", model, "Model file")->required();
    sim_rd->add_option("--rate", rate, "Rate in bits per channel use")->required();
    sim_rd->add_option("--distortion", distortion, "Distortion threshold D")->required();
    sim_rd->add_option("--n", n, "Blocklength")->required();
    sim_rd->add_option("--trials", trials, "Number of trials")->required();
    sim_rd->add_option("--seed", seed, "Random seed")->required();
    sim_rd->add_option("--workers", workers, "Worker threads")->capture_default_str();
    sim_rd->add_option("--codebook", codebook, "Fresh codebook per trial, or one fixed codebook")
        ->check(CLI::IsMember({"ensemble", "fixed"}))
        ->capture_default_str();
    add_output(sim_rd, "json");

    auto* sim_ht = simulate->add_subcommand("ht", "Neyman-Pearson test on the echo");
    sim_ht->add_option("model", model, "Model file")->required();
    sim_ht->add_option("--n", n, "Blocklength")->required();
    sim_ht->add_option("--alpha", alpha, "Type-I error target")->capture_default_str();
    sim_ht->add_option("--mode", mode, "Exact law or Monte-Carlo")
        ->check(CLI::IsMember({"mc", "exact_dp"}))
        ->capture_default_str();
    sim_ht->add_option("--trials", trials, "Monte-Carlo trials per hypothesis");
    sim_ht->add_option("--seed", seed,
                       "Random seed (required for mc; without it exact_dp uses a fixed input sequence of type px)");
    sim_ht->add_option("--px", px_text, "Input pmf, comma separated (default uniform)");
    sim_ht->add_option("--bin-width", bin_width, "LLR atom merge width in bits")->capture_default_str();
    sim_ht->add_option("--workers", workers, "Worker threads")->capture_default_str();
    add_output(sim_ht, "json");

    auto* typicality = app.add_subcommand("typicality", "Typical-set tools");
    typicality->require_subcommand(1);
    auto* bound = typicality->add_subcommand("bound", "Lower bound 1 - cells/(4 mu^2 n) on the typical-set mass");
    bound->add_option("--mu", mu, "Typicality slack")->required();
    bound->add_option("--n", n, "Sequence length")->required();
    bound->add_option("--cells", cells, "Size of the product alphabet")->required();
    add_output(bound, "csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kFailure;
    }

    try {
        if (validate->parsed()) return cmd_validate(model, out);
        if (estimator->parsed()) return cmd_estimator(model, out);
        for (auto* sub : frontier_kinds)
            if (sub->parsed()) return cmd_frontier(sub->get_name(), model, points, plot, out);

        if (sim_rd->parsed()) {
            if (workers == 0) throw std::invalid_argument("--workers must be >= 1");
            if (trials == 0) throw std::invalid_argument("--trials must be >= 1");
            (void)isac::codebook_size(n, rate);  // size guard before any work
            const auto inst = load_valid(model);
            isac::RdOptions opt;
            opt.workers = workers;
            opt.codebook = codebook == "fixed" ? isac::CodebookMode::fixed : isac::CodebookMode::ensemble;
            const json config = {{"command", "simulate rd"}, {"model", model},   {"format", out.format},
                                 {"workers", workers},       {"solver", isac::to_json(opt.solver)}};
            echo_config(out, config);
            const auto r = isac::run_rd_experiment(inst, rate, distortion, n, trials, *seed, opt);
            if (r.undecodable > 0)
                std::cerr << "warning: " << r.undecodable << " outputs were impossible under every codeword\n";
            out.emit(flat_report(r, config, out.format));
            return kOk;
        }

        if (sim_ht->parsed()) {
            const bool mc = mode == "mc";
            if (n == 0) throw std::invalid_argument("--n must be >= 1");
            if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("--alpha must lie in (0, 1)");
            if (!(bin_width >= 0.0)) throw std::invalid_argument("--bin-width must be >= 0");
            if (workers == 0) throw std::invalid_argument("--workers must be >= 1");
            if (mc && trials == 0) throw std::invalid_argument("--mode mc requires --trials >= 1");
            if (mc && !seed) throw std::invalid_argument("--mode mc requires --seed");
            const auto inst = load_valid(model);
            if (!inst.q_s) throw isac::ModelError("alternative hypothesis prior required (q_s)");
            const std::size_t nx = inst.channel.nx();
            const auto px = px_text.empty() ? std::vector<double>(nx, 1.0 / static_cast<double>(nx))
                                            : parse_pmf(px_text, nx);
            isac::HtOptions opt;
            opt.workers = workers;
            opt.bin_width = bin_width;
            opt.input = seed ? isac::InputDraw::iid : isac::InputDraw::fixed_type;
            const json config = {{"command", "simulate ht"}, {"model", model}, {"format", out.format},
                                 {"workers", workers}};
            echo_config(out, config);
            const auto r = isac::run_ht_experiment(inst, px, n, alpha, mc ? isac::SimMode::monte_carlo
                                                                           : isac::SimMode::exact_dp,
                                                   mc ? trials : 0, seed.value_or(0), opt);
            if (r.infinite_llr) std::cerr << "warning: some echo symbols have zero probability under one hypothesis\n";
            out.emit(flat_report(r, config, out.format));
            return kOk;
        }

        if (bound->parsed()) {
            const double b = isac::typicality_lower_bound(mu, n, cells);
            const json config = {{"command", "typicality bound"}, {"mu", mu}, {"n", n}, {"cells", cells},
                                 {"format", out.format}};
            echo_config(out, config);
            if (out.format == "json") out.emit(json{{"config", config}, {"bound", b}, {"vacuous", b <= 0.0}}.dump(2) + "\n");
            else out.emit("mu,n,cells,bound\n" + num(mu) + ',' + std::to_string(n) + ',' + std::to_string(cells) + ',' +
                          num(b) + '\n');
            return kOk;
        }
        return kFailure;
    } catch (const InvalidModel& e) {
        std::cerr << "invalid model '" << model << "':\n";
        print_report(std::cerr, e.report);
        return kInvalidModel;
    } catch (const isac::ModelError& e) {
        std::cerr << "invalid model '" << model << "': " << e.what() << '\n';
        return kInvalidModel;
    } catch (const isac::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const std::invalid_argument& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}
