// Batch front end: simulate cohorts, tabulate analytic quantities, fit event
// tables, run shared-step detection, and rebuild the slope-recovery figure.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "multistage/detect.hpp"
#include "multistage/event_table.hpp"
#include "multistage/exponential.hpp"
#include "multistage/fig2.hpp"
#include "multistage/json_io.hpp"
#include "multistage/model.hpp"
#include "multistage/simulate.hpp"
#include "multistage/survival.hpp"
#include "multistage/svg_plot.hpp"

namespace fs = std::filesystem;
using namespace multistage;

namespace {

struct GridSpec {
    double t0 = 0.0;
    double t1 = 70.0;
    int steps = 36;
};

GridSpec parse_grid(const std::string& text) {
    GridSpec grid;
    std::istringstream in(text);
    char c1 = 0, c2 = 0;
    if (!(in >> grid.t0 >> c1 >> grid.t1 >> c2 >> grid.steps) || c1 != ':' || c2 != ':' ||
        !in.eof())
        throw CLI::ValidationError("--grid", "expected T0:T1:STEPS");
    if (!(grid.t0 >= 0.0) || !(grid.t1 > grid.t0) || grid.steps < 2)
        throw CLI::ValidationError("--grid", "requires 0 <= T0 < T1 and STEPS >= 2");
    return grid;
}

fs::path ensure_outdir(const std::string& dir) {
    fs::path path(dir);
    fs::create_directories(path);
    return path;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string csv_number(double value) {
    if (std::isnan(value)) return "nan";
    std::ostringstream out;
    out.precision(12);
    out << value;
    return out.str();
}

int cmd_simulate(const std::string& model_file, const std::string& out_dir,
                 std::int64_t subjects, double follow_up, std::uint64_t seed, int threads) {
    const ModelVariant model = load_model_file(model_file);
    const fs::path dir = ensure_outdir(out_dir);
    const CohortSpec spec(subjects, follow_up, seed, model);
    const EventTable table = simulate(spec, threads);
    const fs::path out_path = dir / "events.csv";
    write_event_table_csv(table, out_path);
    std::cout << "wrote " << table.records.size() << " records to " << out_path.string()
              << '\n';
    return 0;
}

int cmd_analytic(const std::string& model_file, const std::string& out_dir,
                 const std::string& grid_text) {
    const ModelVariant loaded = load_model_file(model_file);
    const auto* shared = std::get_if<SharedStepModel>(&loaded);
    if (shared == nullptr)
        throw std::runtime_error(
            "analytic: requires a shared-step model file (the independent "
            "counterpart is derived automatically)");
    const IndependentModel indep = independent_from_shared(*shared);
    const GridSpec grid = parse_grid(grid_text);
    const fs::path dir = ensure_outdir(out_dir);

    const auto& diseases = shared->diseases;
    std::ostringstream csv;
    csv << "t";
    for (const auto& [name, law] : diseases) csv << ",F_" << name;
    for (std::size_t a = 0; a < diseases.size(); ++a)
        for (std::size_t b = a + 1; b < diseases.size(); ++b)
            csv << ",F_" << diseases[a].first << "_" << diseases[b].first;
    for (std::size_t a = 0; a < diseases.size(); ++a)
        for (std::size_t b = 0; b < diseases.size(); ++b)
            if (a != b)
                csv << ",cond_" << diseases[a].first << "_given_" << diseases[b].first;
    csv << ",en_shared,en_indep,var_n_shared,var_n_indep,p0_shared,p0_indep"
        << ",en_pos_shared,en_pos_indep\n";

    for (int i = 0; i < grid.steps; ++i) {
        const double t = grid.t0 + (grid.t1 - grid.t0) * i / (grid.steps - 1);
        csv << csv_number(t);
        for (const auto& [name, law] : diseases)
            csv << ',' << csv_number(disease_cdf(*shared, name, t));
        for (std::size_t a = 0; a < diseases.size(); ++a)
            for (std::size_t b = a + 1; b < diseases.size(); ++b)
                csv << ','
                    << csv_number(joint_cdf(*shared, diseases[a].first, diseases[b].first, t));
        for (std::size_t a = 0; a < diseases.size(); ++a)
            for (std::size_t b = 0; b < diseases.size(); ++b) {
                if (a == b) continue;
                const double denom = disease_cdf(*shared, diseases[b].first, t);
                csv << ','
                    << csv_number(denom > 0.0 ? conditional_cdf(*shared, diseases[a].first,
                                                                diseases[b].first, t)
                                              : std::nan(""));
            }
        const double p0s = prob_zero(*shared, t);
        const double p0i = prob_zero_indep(indep, t);
        csv << ',' << csv_number(expected_n(*shared, t)) << ','
            << csv_number(expected_n(indep, t)) << ',' << csv_number(variance_n(*shared, t))
            << ',' << csv_number(variance_n_indep(indep, t)) << ',' << csv_number(p0s) << ','
            << csv_number(p0i) << ','
            << csv_number(p0s < 1.0 ? expected_n(*shared, t) / (1.0 - p0s) : std::nan(""))
            << ','
            << csv_number(p0i < 1.0 ? expected_n(indep, t) / (1.0 - p0i) : std::nan(""))
            << '\n';
    }

    const fs::path out_path = dir / "analytic.csv";
    write_text_file(out_path, csv.str());
    std::cout << "wrote " << grid.steps << " grid rows to " << out_path.string() << '\n';
    return 0;
}

std::string fit_csv_line(const FitResult& fit, const std::string& disease,
                         const std::string& conditioned_on) {
    std::ostringstream out;
    out << "disease,conditioned_on,q,lambda,se_q,se_log_lambda,cov_q_log_lambda,"
        << "log_likelihood,n_events,n_at_risk\n";
    out << disease << ',' << conditioned_on << ',' << csv_number(fit.q) << ','
        << csv_number(fit.lambda) << ',' << csv_number(fit.se_q) << ','
        << csv_number(fit.se_log_lambda) << ',' << csv_number(fit.cov_q_log_lambda) << ','
        << csv_number(fit.log_likelihood) << ',' << fit.n_events << ',' << fit.n_at_risk
        << '\n';
    return out.str();
}

int cmd_fit(const std::string& table_file, const std::string& out_dir,
            const std::string& disease, const std::string& condition_on) {
    const EventTable table = read_event_table_csv(fs::path(table_file));
    const fs::path dir = ensure_outdir(out_dir);

    const EventTable* target = &table;
    EventTable view;
    if (!condition_on.empty()) {
        view = conditional_view(table, disease, condition_on);
        target = &view;
    }

    const FitResult fit = fit_power_law_mle(*target, disease);
    const CumHazardCurve curve = nelson_aalen(*target, disease);

    const std::string stem =
        "fit_" + disease + (condition_on.empty() ? "" : "_given_" + condition_on);
    write_text_file(dir / (stem + ".json"),
                    fit_to_json(fit, disease, condition_on).dump(2) + "\n");
    write_text_file(dir / (stem + ".csv"), fit_csv_line(fit, disease, condition_on));
    write_curve_csv(curve, dir / ("curve_" + disease +
                                  (condition_on.empty() ? "" : "_given_" + condition_on) +
                                  ".csv"));

    std::cout << "fit " << disease;
    if (!condition_on.empty()) std::cout << " after " << condition_on;
    std::cout << ": q = " << fit.q << " +/- " << fit.se_q << ", lambda = " << fit.lambda
              << " (" << fit.n_events << " events of " << fit.n_at_risk << " at risk)\n";
    return 0;
}

int cmd_detect(const std::string& table_file, const std::string& out_dir,
               const std::string& disease_j, const std::string& disease_k, double alpha) {
    const EventTable table = read_event_table_csv(fs::path(table_file));
    const fs::path dir = ensure_outdir(out_dir);

    const DetectionReport report = detect_shared_step(table, disease_j, disease_k, alpha);
    write_text_file(dir / "detection.json", detection_report_to_json(report).dump(2) + "\n");
    std::cout << detection_summary(report);
    return 0;
}

int cmd_reproduce_fig2(const std::string& out_dir, std::int64_t subjects, double follow_up,
                       std::uint64_t seed, int threads) {
    Fig2Config config;
    config.subjects = subjects;
    config.follow_up = follow_up;
    config.seed = seed;
    config.threads = threads;
    const fs::path dir = ensure_outdir(out_dir);

    const std::vector<Fig2Cell> cells =
        run_fig2(config, [](const std::string& line) { std::cout << line << '\n'; });

    std::ostringstream csv;
    csv << "q0,model,q_est,se_q,n_events,reference_q\n";
    for (const auto& cell : cells) {
        csv << cell.q0 << ",shared," << csv_number(cell.q_shared) << ','
            << csv_number(cell.se_shared) << ',' << cell.events_shared << ',' << 6 - cell.q0
            << '\n';
        csv << cell.q0 << ",independent," << csv_number(cell.q_indep) << ','
            << csv_number(cell.se_indep) << ',' << cell.events_indep << ",7\n";
    }
    write_text_file(dir / "fig2.csv", csv.str());

    std::ostringstream config_text;
    config_text << "reproduce-fig2 subjects=" << subjects << " follow_up=" << follow_up
                << " seed=" << seed;
    std::ostringstream meta;
    meta << "multistage " << config_text.str() << " fnv1a64=0x" << std::hex
         << fnv1a_hash(config_text.str());

    SvgSeries shared_series{"shared step (fit)", "#1f6fb2", false, {}};
    SvgSeries indep_series{"independent (fit)", "#c23b22", true, {}};
    for (const auto& cell : cells) {
        shared_series.points.push_back(
            {static_cast<double>(cell.q0), cell.q_shared, 1.96 * cell.se_shared});
        indep_series.points.push_back(
            {static_cast<double>(cell.q0) + 0.08, cell.q_indep, 1.96 * cell.se_indep});
    }
    SvgRefLine shared_ref{"q = 6 - q0", "#1f6fb2", "6,4", {{0.0, 6.0}, {5.0, 1.0}}};
    SvgRefLine indep_ref{"q = 7", "#c23b22", "2,3", {{0.0, 7.0}, {5.0, 7.0}}};

    write_svg_plot(dir / "fig2.svg", "Conditional power-law fits vs first-step power",
                   "first-step power q0", "fitted power q",
                   {shared_series, indep_series}, {shared_ref, indep_ref}, meta.str());

    std::cout << "wrote " << (dir / "fig2.csv").string() << " and "
              << (dir / "fig2.svg").string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shared-step multistage disease model toolkit"};
    app.require_subcommand(1);

    std::string model_file, out_dir = ".", table_file, disease, condition_on;
    std::string disease_j, disease_k, grid_text = "0:70:36";
    std::int64_t subjects = 100000;
    double follow_up = 70.0, alpha = 0.05;
    std::uint64_t seed = 1;
    int threads = 0;

    auto* sim = app.add_subcommand("simulate", "simulate a cohort to events.csv");
    sim->add_option("--model", model_file, "model JSON file")->required()
        ->check(CLI::ExistingFile);
    sim->add_option("--out", out_dir, "output directory");
    sim->add_option("--subjects", subjects, "cohort size")->check(CLI::PositiveNumber);
    sim->add_option("--follow-up", follow_up, "administrative censoring age (years)")
        ->check(CLI::PositiveNumber);
    sim->add_option("--seed", seed, "RNG seed");
    sim->add_option("--threads", threads, "worker threads (0 = auto)");

    auto* ana = app.add_subcommand("analytic", "tabulate analytic quantities on an age grid");
    ana->add_option("--model", model_file, "shared-step model JSON file")->required()
        ->check(CLI::ExistingFile);
    ana->add_option("--out", out_dir, "output directory");
    ana->add_option("--grid", grid_text, "age grid T0:T1:STEPS");

    auto* fit = app.add_subcommand("fit", "Nelson-Aalen curve and power-law MLE");
    fit->add_option("--table", table_file, "event table CSV")->required()
        ->check(CLI::ExistingFile);
    fit->add_option("--out", out_dir, "output directory");
    fit->add_option("--disease", disease, "disease to fit")->required();
    fit->add_option("--condition-on", condition_on,
                    "restrict to subjects with this disease first (left-truncated)");

    auto* det = app.add_subcommand("detect", "slope-change test and hidden-step recovery");
    det->add_option("--table", table_file, "event table CSV")->required()
        ->check(CLI::ExistingFile);
    det->add_option("--out", out_dir, "output directory");
    det->add_option("--disease-j", disease_j, "disease fitted")->required();
    det->add_option("--disease-k", disease_k, "conditioning disease")->required();
    det->add_option("--alpha", alpha, "significance level")->check(CLI::Range(1e-6, 0.5));

    auto* fig = app.add_subcommand("reproduce-fig2",
                                   "conditional fits vs q0 for shared and independent cohorts");
    fig->add_option("--out", out_dir, "output directory");
    fig->add_option("--subjects", subjects, "subjects per cell")->check(CLI::PositiveNumber);
    fig->add_option("--follow-up", follow_up, "follow-up age (years)")
        ->check(CLI::PositiveNumber);
    fig->add_option("--seed", seed, "RNG seed");
    fig->add_option("--threads", threads, "worker threads (0 = auto)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(model_file, out_dir, subjects, follow_up, seed, threads);
        if (ana->parsed()) return cmd_analytic(model_file, out_dir, grid_text);
        if (fit->parsed()) return cmd_fit(table_file, out_dir, disease, condition_on);
        if (det->parsed())
            return cmd_detect(table_file, out_dir, disease_j, disease_k, alpha);
        if (fig->parsed()) {
            const std::int64_t n =
                fig->get_option("--subjects")->empty() ? 1'000'000 : subjects;
            return cmd_reproduce_fig2(out_dir, n, follow_up, seed, threads);
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
    return 0;
}
