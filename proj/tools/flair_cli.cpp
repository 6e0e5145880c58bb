// Command-line frontend: ties ingestion, the competitiveness metric, the
// toxicity measures, strategy backtesting, scenario generation and quadrant
// export into one reproducible pipeline.
//
// Contract highlights:
//  - exit 0 on success, 2 on validation/user error, 3 on internal errors;
//  - scalar results print on stdout with 12 significant digits;
//  - file outputs (JSON via shortest round-trip doubles, CSV, SVG) are
//    byte-deterministic given the same inputs;
//  - FLAIR_LOG_LEVEL in {error, warn, info, debug} gates stderr logging;
//  - --config names a JSON file whose top-level keys default global options
//    and whose per-subcommand objects default that subcommand's options.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flair/backtest.hpp"
#include "flair/metrics.hpp"
#include "flair/scenarios.hpp"
#include "flair/timeline.hpp"
#include "flair/toxicity.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ------------------------------ logging ------------------------------------

enum class LogLevel : int { error = 0, warn = 1, info = 2, debug = 3 };

LogLevel g_log_level = LogLevel::warn;

void init_log_level() {
    const char* env = std::getenv("FLAIR_LOG_LEVEL");
    if (env == nullptr) return;
    const std::string v = env;
    if (v == "error") {
        g_log_level = LogLevel::error;
    } else if (v == "warn") {
        g_log_level = LogLevel::warn;
    } else if (v == "info") {
        g_log_level = LogLevel::info;
    } else if (v == "debug") {
        g_log_level = LogLevel::debug;
    } else {
        std::cerr << "[warn] unknown FLAIR_LOG_LEVEL '" << v << "' (want error|warn|info|debug)\n";
    }
}

void logf(LogLevel lvl, const std::string& msg) {
    if (static_cast<int>(lvl) > static_cast<int>(g_log_level)) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::cerr << "[" << names[static_cast<int>(lvl)] << "] " << msg << "\n";
}

// ------------------------- formatting helpers ------------------------------

// stdout scalars: 12 significant digits, trailing zeros kept.
std::string sig12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%#.12g", v);
    return buf;
}

// file scalars: shortest decimal that round-trips the double exactly.
std::string num(double v) { return json(v).dump(); }

std::string sanitize_component(const std::string& s) {
    std::string out;
    for (const char ch : s)
        out += (std::isalnum(static_cast<unsigned char>(ch)) != 0 || ch == '-' || ch == '_') ? ch : '_';
    return out.empty() ? std::string("unnamed") : out;
}

// --------------------------- file plumbing ---------------------------------

json load_json_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) flair::fail(flair::Errc::invalid_config, std::string(what) + " not found: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded())
        flair::fail(flair::Errc::invalid_config, std::string(what) + " is not valid JSON: " + path);
    return j;
}

void write_text_file(const fs::path& path, const std::string& body) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec)
            flair::fail(flair::Errc::invalid_config,
                        "cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path);
    if (!out) flair::fail(flair::Errc::invalid_config, "cannot open " + path.string() + " for writing");
    out << body;
    out.flush();
    if (!out) flair::fail(flair::Errc::invalid_config, "failed writing " + path.string());
    logf(LogLevel::info, "wrote " + path.string());
}

// ------------------------- shared option groups ----------------------------

struct OutputArgs {
    std::string dir = ".";
    std::vector<std::string> formats{"json", "csv", "svg"};

    bool wants(const std::string& fmt) const {
        return std::find(formats.begin(), formats.end(), fmt) != formats.end();
    }
    fs::path file(const std::string& stem, const std::string& ext) const {
        return fs::path(dir) / (stem + "." + ext);
    }
};

struct InputArgs {
    std::string snapshot_path;
    std::string log_path;
    std::string curve_kind = "concentrated_v3";
    double fee_rate = 0.003;
    int64_t tick_spacing = 60;

    void attach(CLI::App* cmd) {
        cmd->add_option("--snapshot", snapshot_path, "timeline snapshot produced by 'ingest'");
        cmd->add_option("--log", log_path, "raw event log (.jsonl, or .csv by extension)");
        cmd->add_option("--curve", curve_kind, "curve kind when reading --log")
            ->check(CLI::IsMember({"constant_product", "concentrated_v3"}))
            ->capture_default_str();
        cmd->add_option("--fee-rate", fee_rate, "pool fee fraction when reading --log")
            ->capture_default_str();
        cmd->add_option("--tick-spacing", tick_spacing, "tick spacing when reading --log")
            ->capture_default_str();
    }

    flair::CurveSpec curve() const {
        flair::CurveSpec c;
        c.kind = curve_kind == "constant_product" ? flair::CurveKind::constant_product
                                                  : flair::CurveKind::concentrated_v3;
        c.fee_rate = fee_rate;
        c.tick_spacing = tick_spacing;
        return c;
    }
};

flair::ParsedEvents parse_event_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) flair::fail(flair::Errc::invalid_config, "event log not found: " + path);
    const bool csv = fs::path(path).extension() == ".csv";
    return csv ? flair::read_events_csv(in) : flair::read_events_jsonl(in);
}

flair::PoolTimeline load_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) flair::fail(flair::Errc::invalid_config, "snapshot not found: " + path);
    auto tl = flair::PoolTimeline::snapshot_load(in);
    logf(LogLevel::debug, "snapshot " + path + ": " + std::to_string(tl.position_count()) +
                              " positions, " + std::to_string(tl.segment_count()) + " segments");
    return tl;
}

flair::PoolTimeline load_timeline(const InputArgs& in) {
    const bool have_snap = !in.snapshot_path.empty();
    const bool have_log = !in.log_path.empty();
    if (have_snap == have_log)
        flair::fail(flair::Errc::invalid_config, "exactly one of --snapshot and --log is required");
    if (have_snap) return load_snapshot(in.snapshot_path);
    auto parsed = parse_event_log(in.log_path);
    if (parsed.events.empty()) flair::fail(flair::Errc::invalid_event, "empty log: " + in.log_path);
    return flair::PoolTimeline::ingest(in.curve(), parsed.events, &parsed.lines);
}

constexpr double kUnsetTime = std::numeric_limits<double>::quiet_NaN();

struct WindowArgs {
    double from = kUnsetTime;
    double to = kUnsetTime;

    void attach(CLI::App* cmd) {
        cmd->add_option("--from", from, "window start (default: span start)");
        cmd->add_option("--to", to, "window end (default: span end)");
    }
    std::pair<double, double> resolve(const flair::PoolTimeline& tl) const {
        if (tl.empty()) flair::fail(flair::Errc::invalid_event, "timeline holds no events");
        return {std::isnan(from) ? tl.span_start() : from, std::isnan(to) ? tl.span_end() : to};
    }
};

struct SigmaArgs {
    double sigma = 0.0;
    bool estimate = false;

    void attach(CLI::App* cmd) {
        auto* s = cmd->add_option("--sigma", sigma, "volatility per sqrt(time unit)")
                      ->capture_default_str();
        cmd->add_flag("--estimate-sigma", estimate,
                      "estimate volatility from the implied log-price path over the window")
            ->excludes(s);
    }
    double resolve(const flair::PoolTimeline& tl, double t0, double t1) const {
        if (!estimate) return sigma;
        const double est = flair::estimate_volatility(tl, t0, t1);
        logf(LogLevel::info, "estimated sigma = " + num(est));
        return est;
    }
};

// ---------------------- JSON config file adapter ---------------------------

// Flat keys default global options; an object valued key defaults the options
// of the subcommand with that name.  Arrays become repeated values.
class JsonConfig : public CLI::Config {
  public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}\n"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
        json j = json::parse(in, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw CLI::FileError("config must be a JSON object");
        std::vector<CLI::ConfigItem> items;
        walk(j, {}, items);
        return items;
    }

  private:
    static std::string scalar(const json& v) {
        return v.is_string() ? v.get<std::string>() : v.dump();
    }
    static void walk(const json& j, const std::vector<std::string>& parents,
                     std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : j.items()) {
            if (value.is_object()) {
                auto deeper = parents;
                deeper.push_back(key);
                walk(value, deeper, items);
            } else {
                CLI::ConfigItem item;
                item.parents = parents;
                item.name = key;
                if (value.is_array())
                    for (const auto& e : value) item.inputs.push_back(scalar(e));
                else
                    item.inputs.push_back(scalar(value));
                items.push_back(std::move(item));
            }
        }
    }
};

// ----------------------------- SVG export ----------------------------------

struct QuadrantRow {
    std::string label;
    double cm = 0.0;
    double tox = 0.0;
};

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string axis_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Fixed 800x600 canvas, 5% margins, linear axes, 3-pixel circles.  Both axes
// increase toward the origin (bottom-left), matching the quadrant reading
// where the competitive, toxic corner is at the origin; the arrowheads sit at
// the increasing ends.
std::string render_quadrant_svg(const std::vector<QuadrantRow>& rows) {
    constexpr double W = 800.0, H = 600.0;
    constexpr double MX = 40.0, MY = 30.0;  // 5% of each dimension
    const double B = H - MY;                // bottom axis y

    const auto padded = [](double lo, double hi) {
        if (hi - lo < 1e-12) return std::pair<double, double>{lo - 0.5, hi + 0.5};
        const double pad = 0.1 * (hi - lo);
        return std::pair<double, double>{lo - pad, hi + pad};
    };
    double cm_lo = rows.front().cm, cm_hi = rows.front().cm;
    double tox_lo = rows.front().tox, tox_hi = rows.front().tox;
    for (const auto& r : rows) {
        cm_lo = std::min(cm_lo, r.cm);
        cm_hi = std::max(cm_hi, r.cm);
        tox_lo = std::min(tox_lo, r.tox);
        tox_hi = std::max(tox_hi, r.tox);
    }
    const auto [cl, ch] = padded(cm_lo, cm_hi);
    const auto [tl, th] = padded(tox_lo, tox_hi);

    // Larger values map closer to the origin corner on both axes.
    const auto x_of = [&](double cm) { return MX + (ch - cm) / (ch - cl) * (W - 2.0 * MX); };
    const auto y_of = [&](double tox) { return MY + (tox - tl) / (th - tl) * (H - 2.0 * MY); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
           "viewBox=\"0 0 800 600\">\n";
    svg << "  <rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
    // axes with arrowheads at the origin-adjacent (increasing) ends
    svg << "  <line x1=\"" << px(W - MX) << "\" y1=\"" << px(B) << "\" x2=\"" << px(MX + 12.0)
        << "\" y2=\"" << px(B) << "\" stroke=\"black\"/>\n";
    svg << "  <polygon points=\"" << px(MX + 2.0) << "," << px(B) << " " << px(MX + 12.0) << ","
        << px(B - 4.0) << " " << px(MX + 12.0) << "," << px(B + 4.0) << "\" fill=\"black\"/>\n";
    svg << "  <line x1=\"" << px(MX) << "\" y1=\"" << px(MY) << "\" x2=\"" << px(MX) << "\" y2=\""
        << px(B - 12.0) << "\" stroke=\"black\"/>\n";
    svg << "  <polygon points=\"" << px(MX) << "," << px(B - 2.0) << " " << px(MX - 4.0) << ","
        << px(B - 12.0) << " " << px(MX + 4.0) << "," << px(B - 12.0) << "\" fill=\"black\"/>\n";
    // axis names and end values
    svg << "  <text x=\"" << px(W / 2.0) << "\" y=\"" << px(H - 8.0)
        << "\" text-anchor=\"middle\" font-size=\"14\">LP competitiveness</text>\n";
    svg << "  <text x=\"16\" y=\"300\" text-anchor=\"middle\" font-size=\"14\" "
           "transform=\"rotate(-90 16 300)\">order flow toxicity</text>\n";
    svg << "  <text x=\"" << px(MX) << "\" y=\"" << px(B + 16.0)
        << "\" text-anchor=\"start\" font-size=\"12\">" << axis_value(ch) << "</text>\n";
    svg << "  <text x=\"" << px(W - MX) << "\" y=\"" << px(B + 16.0)
        << "\" text-anchor=\"end\" font-size=\"12\">" << axis_value(cl) << "</text>\n";
    svg << "  <text x=\"" << px(MX - 6.0) << "\" y=\"" << px(B)
        << "\" text-anchor=\"end\" font-size=\"12\">" << axis_value(th) << "</text>\n";
    svg << "  <text x=\"" << px(MX - 6.0) << "\" y=\"" << px(MY + 10.0)
        << "\" text-anchor=\"end\" font-size=\"12\">" << axis_value(tl) << "</text>\n";
    for (const auto& r : rows) {
        const double cx = x_of(r.cm), cy = y_of(r.tox);
        svg << "  <circle cx=\"" << px(cx) << "\" cy=\"" << px(cy)
            << "\" r=\"3\" fill=\"#1f6fb2\"/>\n";
        svg << "  <text x=\"" << px(cx + 6.0) << "\" y=\"" << px(cy - 6.0)
            << "\" font-size=\"12\">" << r.label << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

// ------------------------------ subcommands --------------------------------

struct IngestCmd {
    std::string log_path;
    std::string snapshot_out;
    InputArgs curve_args;  // only the curve fields are attached

    void attach(CLI::App* cmd) {
        cmd->add_option("--log", log_path, "event log to ingest (.jsonl, or .csv by extension)")
            ->required();
        cmd->add_option("--snapshot-out", snapshot_out,
                        "snapshot path (default: <out>/<log stem>.snapshot.json)");
        cmd->add_option("--curve", curve_args.curve_kind, "curve kind")
            ->check(CLI::IsMember({"constant_product", "concentrated_v3"}))
            ->capture_default_str();
        cmd->add_option("--fee-rate", curve_args.fee_rate, "pool fee fraction")
            ->capture_default_str();
        cmd->add_option("--tick-spacing", curve_args.tick_spacing, "tick spacing")
            ->capture_default_str();
    }

    int run(const OutputArgs& out) const {
        auto parsed = parse_event_log(log_path);
        if (parsed.events.empty()) flair::fail(flair::Errc::invalid_event, "empty log: " + log_path);
        const auto tl = flair::PoolTimeline::ingest(curve_args.curve(), parsed.events, &parsed.lines);
        fs::path snap = snapshot_out.empty()
                            ? out.file(fs::path(log_path).stem().string() + ".snapshot", "json")
                            : fs::path(snapshot_out);
        std::ostringstream body;
        tl.snapshot_save(body);
        write_text_file(snap, body.str());
        std::cout << "events: " << parsed.events.size() << "\n";
        std::cout << "positions: " << tl.position_count() << "\n";
        std::cout << "span: [" << sig12(tl.span_start()) << ", " << sig12(tl.span_end()) << "]\n";
        std::cout << "total fees: " << sig12(tl.total_fees()) << "\n";
        std::cout << "snapshot: " << snap.string() << "\n";
        return 0;
    }
};

struct FlairCmd {
    InputArgs input;
    WindowArgs window;
    std::string position;
    bool aggregate = false;

    void attach(CLI::App* cmd) {
        input.attach(cmd);
        window.attach(cmd);
        cmd->add_option("--position", position, "position id to evaluate");
        cmd->add_flag("--aggregate", aggregate, "evaluate the pool aggregate");
    }

    int run(const OutputArgs& out) const {
        if (aggregate == !position.empty())
            flair::fail(flair::Errc::invalid_config,
                        "exactly one of --position and --aggregate is required");
        const auto tl = load_timeline(input);
        const auto [t0, t1] = window.resolve(tl);
        const auto report =
            aggregate ? flair::flair_aggregate(tl, t0, t1) : flair::flair_position(tl, position, t0, t1);
        std::cout << sig12(report.value) << "\n";
        const std::string stem = "flair_" + sanitize_component(report.subject);
        if (out.wants("json")) write_text_file(out.file(stem, "json"), report.to_json().dump(2) + "\n");
        if (out.wants("csv")) {
            std::ostringstream csv;
            report.write_csv(csv);
            write_text_file(out.file(stem, "csv"), csv.str());
        }
        return 0;
    }
};

struct LvrCmd {
    InputArgs input;
    WindowArgs window;
    SigmaArgs sigma;
    bool normalized = false;

    void attach(CLI::App* cmd) {
        input.attach(cmd);
        window.attach(cmd);
        sigma.attach(cmd);
        cmd->add_flag("--normalized", normalized, "divide each segment by aggregate pool value");
    }

    int run(const OutputArgs& out) const {
        const auto tl = load_timeline(input);
        const auto [t0, t1] = window.resolve(tl);
        const auto report = flair::lvr(tl, sigma.resolve(tl, t0, t1), t0, t1, normalized);
        std::cout << sig12(report.value) << "\n";
        if (out.wants("json")) write_text_file(out.file("lvr", "json"), report.to_json().dump(2) + "\n");
        if (out.wants("csv")) {
            std::ostringstream csv;
            report.write_csv(csv);
            write_text_file(out.file("lvr", "csv"), csv.str());
        }
        return 0;
    }
};

struct MarkoutCmd {
    InputArgs input;
    WindowArgs window;
    double horizon = 0.0;
    bool strict = false;

    void attach(CLI::App* cmd) {
        input.attach(cmd);
        window.attach(cmd);
        cmd->add_option("--horizon", horizon, "forward price lookup offset")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
        cmd->add_flag("--strict", strict, "fail instead of truncating when forward prices run out");
    }

    int run(const OutputArgs& out) const {
        const auto tl = load_timeline(input);
        const auto [t0, t1] = window.resolve(tl);
        const auto report = flair::markout(tl, horizon, t0, t1, strict);
        if (report.truncated)
            logf(LogLevel::warn, "markout truncated: some swaps lack a price at t + horizon");
        std::cout << sig12(report.value) << "\n";
        if (out.wants("json"))
            write_text_file(out.file("markout", "json"), report.to_json().dump(2) + "\n");
        if (out.wants("csv")) {
            std::ostringstream csv;
            report.write_csv(csv);
            write_text_file(out.file("markout", "csv"), csv.str());
        }
        return 0;
    }
};

struct QuadrantCmd {
    std::vector<std::string> snapshots;
    std::vector<std::string> labels;
    WindowArgs window;
    std::string toxicity = "lvr";
    SigmaArgs sigma;
    bool normalized = false;
    double horizon = 0.0;
    bool strict = false;
    bool no_svg = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--snapshot", snapshots, "snapshot files, one per pool")
            ->required()
            ->delimiter(',');
        cmd->add_option("--label", labels, "pool labels matching --snapshot order")->delimiter(',');
        window.attach(cmd);
        cmd->add_option("--toxicity", toxicity, "toxicity measure for the second axis")
            ->check(CLI::IsMember({"lvr", "markout"}))
            ->capture_default_str();
        sigma.attach(cmd);
        cmd->add_flag("--normalized", normalized, "normalized LVR");
        cmd->add_option("--horizon", horizon, "markout horizon")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
        cmd->add_flag("--strict", strict, "strict markout truncation handling");
        cmd->add_flag("--no-svg", no_svg, "skip the SVG scatter");
    }

    int run(const OutputArgs& out) const {
        if (!labels.empty() && labels.size() != snapshots.size())
            flair::fail(flair::Errc::invalid_config, "--label count must match --snapshot count");
        std::vector<QuadrantRow> rows;
        for (size_t k = 0; k < snapshots.size(); ++k) {
            const auto tl = load_snapshot(snapshots[k]);
            const auto [t0, t1] = window.resolve(tl);
            const auto tox = toxicity == "lvr"
                                 ? flair::lvr(tl, sigma.resolve(tl, t0, t1), t0, t1, normalized)
                                 : flair::markout(tl, horizon, t0, t1, strict);
            const auto [x, y] = flair::quadrant_point(tl, tox, t0, t1);
            QuadrantRow row;
            row.label = labels.empty() ? fs::path(snapshots[k]).stem().stem().string() : labels[k];
            row.cm = x;
            row.tox = y;
            std::cout << row.label << ": cm_agg=" << sig12(x) << " toxicity=" << sig12(y) << "\n";
            rows.push_back(std::move(row));
        }
        if (out.wants("csv")) {
            std::ostringstream csv;
            csv << "pool,cm_agg,toxicity\n";
            for (const auto& r : rows) csv << r.label << "," << num(r.cm) << "," << num(r.tox) << "\n";
            write_text_file(out.file("quadrant", "csv"), csv.str());
        }
        if (out.wants("svg") && !no_svg)
            write_text_file(out.file("quadrant", "svg"), render_quadrant_svg(rows));
        return 0;
    }
};

struct BacktestCmd {
    InputArgs input;
    WindowArgs window;
    SigmaArgs sigma;
    std::string grid_path;
    double capital = 0.0;
    std::string objective = "competitiveness";

    void attach(CLI::App* cmd) {
        input.attach(cmd);
        window.attach(cmd);
        sigma.attach(cmd);
        cmd->add_option("--grid", grid_path, "strategy grid config (JSON)")->required();
        cmd->add_option("--capital", capital,
                        "deployment capital (overrides the grid config's value)");
        cmd->add_option("--objective", objective, "ranking objective")
            ->check(CLI::IsMember({"competitiveness", "profitability"}))
            ->capture_default_str();
    }

    int run(const OutputArgs& out) const {
        const auto tl = load_timeline(input);
        const auto [t0, t1] = window.resolve(tl);
        const auto cfg = flair::strategy_grid_from_json(load_json_file(grid_path, "grid config"));
        const double c = capital > 0.0 ? capital : cfg.capital;
        if (!(c > 0.0))
            flair::fail(flair::Errc::invalid_config,
                        "capital must be given via --capital or the grid config");
        const auto obj = objective == "competitiveness" ? flair::Objective::competitiveness
                                                        : flair::Objective::profitability;
        const auto res =
            flair::optimize(tl, cfg.strategies, c, t0, t1, obj, sigma.resolve(tl, t0, t1));
        const auto& w = res.winner();
        std::cout << "winner: " << w.spec.label() << " cm=" << sig12(w.cm)
                  << " profit=" << sig12(w.profit) << "\n";
        if (out.wants("json"))
            write_text_file(out.file("backtest", "json"), res.to_json().dump(2) + "\n");
        if (out.wants("csv")) {
            std::ostringstream csv;
            res.write_ranking_csv(csv);
            write_text_file(out.file("backtest_ranking", "csv"), csv.str());
        }
        return 0;
    }
};

struct ScenarioCmd {
    std::string spec_path;
    std::string log_out;

    void attach(CLI::App* cmd) {
        cmd->add_option("--spec", spec_path, "scenario spec (JSON)")->required();
        cmd->add_option("--log-out", log_out,
                        "path for the generated event log (default: <out>/<kind>.jsonl)");
    }

    int run(const OutputArgs& out) const {
        const auto spec = flair::ScenarioSpec::from_json(load_json_file(spec_path, "scenario spec"));
        const auto events = flair::generate(spec);
        const fs::path log_path = log_out.empty()
                                      ? out.file(flair::scenario_kind_name(spec.kind), "jsonl")
                                      : fs::path(log_out);
        std::ostringstream body;
        flair::write_events_jsonl(body, events);
        write_text_file(log_path, body.str());
        std::cout << "scenario: " << flair::scenario_kind_name(spec.kind) << "\n";
        std::cout << "events: " << events.size() << "\n";
        std::cout << "span: [" << sig12(spec.t0) << ", " << sig12(spec.T) << "]\n";
        std::cout << "log: " << log_path.string() << "\n";
        const auto cf = flair::closed_form(spec);
        if (cf.available) {
            fs::path sidecar = log_path;
            sidecar.replace_extension();
            sidecar += ".expected.json";
            json j;
            j["expected_cm_agg"] = cf.value;
            j["exact_at_any_grid"] = cf.exact_at_any_grid;
            write_text_file(sidecar, j.dump(2) + "\n");
            std::cout << "expected cm_agg: " << sig12(cf.value) << "\n";
        } else {
            logf(LogLevel::info, "no closed form for this scenario; no sidecar written");
        }
        return 0;
    }
};

}  // namespace

int main(int argc, char** argv) {
    init_log_level();
    try {
        CLI::App app{"Liquidity-pool competitiveness and flow-toxicity analytics"};
        app.require_subcommand(1);
        app.config_formatter(std::make_shared<JsonConfig>());
        app.set_config("--config", "", "JSON file with option defaults (sections per subcommand)");

        OutputArgs out;
        app.add_option("--out", out.dir, "output directory")->capture_default_str();
        app.add_option("--format", out.formats, "output formats to write")
            ->check(CLI::IsMember({"json", "csv", "svg"}))
            ->delimiter(',')
            ->capture_default_str();

        IngestCmd ingest;
        ingest.attach(app.add_subcommand("ingest", "parse an event log into a timeline snapshot"));
        FlairCmd flair_cmd;
        flair_cmd.attach(app.add_subcommand("flair", "competitiveness of a position or the pool"));
        LvrCmd lvr_cmd;
        lvr_cmd.attach(app.add_subcommand("lvr", "integrated loss-versus-rebalancing"));
        MarkoutCmd markout_cmd;
        markout_cmd.attach(app.add_subcommand("markout", "horizon markout of the pool's flow"));
        QuadrantCmd quadrant_cmd;
        quadrant_cmd.attach(app.add_subcommand("quadrant", "competitiveness/toxicity scatter"));
        BacktestCmd backtest_cmd;
        backtest_cmd.attach(app.add_subcommand("backtest", "optimize a strategy grid's FLAIR"));
        ScenarioCmd scenario_cmd;
        scenario_cmd.attach(app.add_subcommand("scenario", "generate a synthetic event log"));

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
            return 2;
        }

        if (app.got_subcommand("ingest")) return ingest.run(out);
        if (app.got_subcommand("flair")) return flair_cmd.run(out);
        if (app.got_subcommand("lvr")) return lvr_cmd.run(out);
        if (app.got_subcommand("markout")) return markout_cmd.run(out);
        if (app.got_subcommand("quadrant")) return quadrant_cmd.run(out);
        if (app.got_subcommand("backtest")) return backtest_cmd.run(out);
        if (app.got_subcommand("scenario")) return scenario_cmd.run(out);
        return 2;  // unreachable: require_subcommand enforces one
    } catch (const flair::Error& e) {
        logf(LogLevel::error, e.what());
        return e.kind() == flair::Errc::internal ? 3 : 2;
    } catch (const json::exception& e) {
        logf(LogLevel::error, std::string("malformed JSON: ") + e.what());
        return 2;
    } catch (const std::exception& e) {
        logf(LogLevel::error, std::string("internal error: ") + e.what());
        return 3;
    }
}
