#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sisapprox/discrete.hpp"
#include "sisapprox/error.hpp"
#include "sisapprox/extra_invariance.hpp"
#include "sisapprox/fiber_ops.hpp"
#include "sisapprox/keyvalue.hpp"
#include "sisapprox/model_io.hpp"
#include "sisapprox/paley_wiener.hpp"
#include "sisapprox/parallel.hpp"
#include "sisapprox/sis.hpp"
#include "sisapprox/spectral_data.hpp"

namespace sisapprox {

namespace {

namespace fs = std::filesystem;

constexpr const char* kOutEnv = "SISAPPROX_OUT";
constexpr const char* kDefaultOut = "sisapprox-out";

fs::path output_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv(kOutEnv); env != nullptr && *env != '\0') return env;
    return kDefaultOut;
}

unsigned worker_count(unsigned flag) {
    if (flag > 0) return flag;
    return std::max(1u, std::thread::hardware_concurrency());
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double sum_of(const RealVector& v) { return v.sum(); }

DiscretePartition load_partition(const std::string& arg, int dim) {
    if (fs::is_regular_file(arg)) return read_partition(arg, dim);
    const auto first = arg.find_first_not_of(" \t");
    if (first != std::string::npos && arg.compare(first, 8, "lattice:") == 0) return parse_partition(arg, dim);
    throw InputError("partition '" + arg + "' is neither a file nor a 'lattice: <matrix>' argument");
}

fs::path model_dir(const fs::path& given) {
    if (fs::is_regular_file(given / "model.txt")) return given;
    if (fs::is_regular_file(given / "model" / "model.txt")) return given / "model";
    throw InputError("no model.txt under '" + given.string() + "'");
}

// Per-cell sum_j |f_j - P f_j|^2 onto the span of the generator fibers.
std::vector<double> projection_residuals(const SpectralDataset& generators, const SpectralDataset& data,
                                         unsigned threads, std::vector<double>& traces) {
    const std::size_t cells = data.grid().num_cells();
    std::vector<double> out(cells, 0.0);
    traces.assign(cells, 0.0);
    parallel_for(cells, threads, [&](std::size_t g) {
        const ComplexMatrix p = span_projector(fiber_matrix(generators, g));
        for (std::size_t j = 0; j < data.num_functions(); ++j) {
            const ComplexVector f = fiber(data, g, j);
            out[g] += (f - p * f).squaredNorm();
            traces[g] += f.squaredNorm();
        }
    });
    return out;
}

std::vector<double> out_of_box_per_cell(const SpectralDataset& ds, int box) {
    const auto& grid = ds.grid();
    std::vector<double> out(grid.num_cells(), 0.0);
    for (std::size_t g = 0; g < grid.num_cells(); ++g) {
        for (std::size_t k = 0; k < grid.num_translations(); ++k) {
            const auto& t = grid.translation(k);
            const bool inside = std::all_of(t.begin(), t.end(), [box](std::int64_t c) { return std::abs(c) <= box; });
            if (inside) continue;
            for (std::size_t j = 0; j < ds.num_functions(); ++j) out[g] += std::norm(ds.at(j, g, k));
        }
    }
    return out;
}

double quadrature(const std::vector<double>& per_cell, double cell_volume) {
    double sum = 0.0;
    for (const double r : per_cell) sum += r;
    return sum * cell_volume;
}

void check_same_grid(const SpectralGrid& model, const SpectralGrid& data) {
    if (!(model == data)) {
        std::ostringstream msg;
        msg << "dataset grid (dim " << data.dim() << ", cells " << data.cells_per_dim() << ", trunc "
            << data.trunc_radius() << ") does not match the model grid (dim " << model.dim() << ", cells "
            << model.cells_per_dim() << ", trunc " << model.trunc_radius() << ")";
        throw InputError(msg.str());
    }
}

// Parseval, error table, per-cell residual identity and optimality checks
// shared by the spectral regimes.
VerificationReport spectral_checks(const SpectralDataset& generators, const SpectralDataset& data,
                                   const std::vector<double>& expected, double stored_error, double table_error,
                                   double optimal_error, unsigned threads) {
    VerificationReport report;
    const double defect = parseval_defect(generators);
    report.add("parseval", defect <= 1e-8, "max orthonormality defect " + format_double(defect));

    const double tol_table = 1e-12 * std::max(std::abs(stored_error), std::numeric_limits<double>::min());
    report.add("error_table", std::abs(table_error - stored_error) <= tol_table,
               "quadrature of residual table " + format_double(table_error) + ", stored error " +
                   format_double(stored_error));

    std::vector<double> traces;
    const auto actual = projection_residuals(generators, data, threads, traces);
    std::string issue;
    for (std::size_t g = 0; g < actual.size() && issue.empty(); ++g) {
        if (std::abs(actual[g] - expected[g]) > 1e-8 * (1.0 + traces[g])) {
            issue = "cell " + std::to_string(g) + ": projection residual " + format_double(actual[g]) +
                    ", stored residual " + format_double(expected[g]);
        }
    }
    report.add("residual_identity", issue.empty(), issue.empty() ? "all cells within 1e-8 (1 + trace)" : issue);

    const double energy = quadrature(traces, data.grid().cell_volume());
    report.add("optimal_error", std::abs(optimal_error - stored_error) <= 1e-8 * (1.0 + energy),
               "refit error " + format_double(optimal_error) + ", stored error " + format_double(stored_error));
    return report;
}

void add_spectral_fields(KeyValueDocument& doc, const SpectralDataset& ds) {
    doc.set("in_grid_energy", sum_of(energy_report(ds)));
    doc.set("tail_energy", truncation_shell_energy(ds));
}

void finish_report(KeyValueDocument& doc, const fs::path& out, std::chrono::steady_clock::time_point start) {
    doc.set("model_path", std::string("model"));
    doc.set("elapsed_seconds", seconds_since(start));
    doc.write(out / "report.txt");
}

// ------------------------------------------------------------------ synth

struct SynthConfig {
    std::string family;
    std::vector<double> sigma;
    std::vector<int> order;
    std::vector<double> a;
    int dim = 1;
    int cells = 64;
    int trunc = 2;
    std::string out;
    std::string format = "binary-c64le";
    std::string stem = "dataset";
};

int cmd_synth(const SynthConfig& cfg, std::ostream& out) {
    const Family family = parse_family(cfg.family);
    const PayloadFormat format = parse_payload_format(cfg.format);
    std::vector<double> params;
    const bool has_sigma = !cfg.sigma.empty();
    const bool has_order = !cfg.order.empty();
    const bool has_a = !cfg.a.empty();
    switch (family) {
        case Family::Gaussian:
            if (!has_sigma || has_order || has_a) throw InputError("gaussian takes --sigma only");
            params = cfg.sigma;
            break;
        case Family::BSpline:
            if (!has_order || has_sigma || has_a) throw InputError("bspline takes --order only");
            for (const int n : cfg.order) params.push_back(n);
            break;
        case Family::Boxcar:
            if (!has_a || has_sigma || has_order) throw InputError("boxcar takes --a only");
            params = cfg.a;
            break;
    }
    const SpectralGrid grid(cfg.dim, cfg.cells, cfg.trunc);
    const SpectralDataset ds = synthesize(family, params, grid);
    const fs::path manifest = write_dataset(ds, output_dir(cfg.out), cfg.stem, format);
    out << manifest.string() << '\n';
    return kExitSuccess;
}

// -------------------------------------------------------------------- fit

struct FitConfig {
    std::string regime;
    std::string input;
    std::size_t rank = 0;
    std::string dual_lattice;
    int box = -1;
    std::string partition;
    std::string out;
    unsigned threads = 1;
    double eig_tol = 1e-12;
    double rank_tol = 1e-10;
};

int fit_spectral(const FitConfig& cfg, const fs::path& out, std::ostream& log) {
    const auto start = std::chrono::steady_clock::now();
    const SpectralDataset ds = ingest(cfg.input);
    const FitOptions options{worker_count(cfg.threads), cfg.rank_tol, cfg.eig_tol};
    const fs::path mdir = out / "model";

    KeyValueDocument doc;
    doc.set("regime", cfg.regime);
    doc.set("requested_rank", cfg.rank);

    if (cfg.regime == "sis" || cfg.regime == "extra") {
        std::optional<ExtraInvariantModel> extra;
        std::optional<FittedModel> plain;
        if (cfg.regime == "extra") {
            extra = fit_extra_invariant(ds, DualLattice(parse_integer_matrix(cfg.dual_lattice)), cfg.rank, options);
            write_model(*extra, mdir);
        } else {
            plain = fit_sis(ds, cfg.rank, options);
            write_model(*plain, mdir);
        }
        const FittedModel& model = extra ? static_cast<const FittedModel&>(*extra) : *plain;
        doc.set("effective_length", model.effective_length);
        doc.set("total_error", model.error);
        write_residuals_csv(model.residuals, out / "residuals.csv");
        write_curves_csv(model.grid, model.eigenvalue_curves, model.curves_per_cell, "lambda", out / "curves.csv");
        doc.set("residuals_path", std::string("residuals.csv"));
        doc.set("curves_path", std::string("curves.csv"));
        add_spectral_fields(doc, ds);
        if (extra) {
            doc.set("dual_lattice", format_integer_matrix(extra->lattice.basis()));
            doc.set("kappa", static_cast<long long>(extra->lattice.index()));
        }
        log << "total_error: " << format_double(model.error) << '\n';
    } else {
        const MultiTileModel model = fit_multitile(ds, cfg.rank, cfg.box, options);
        write_model(model, mdir);
        const auto outside = out_of_box_per_cell(ds, cfg.box);
        std::vector<double> per_cell(model.residuals.size());
        for (std::size_t g = 0; g < per_cell.size(); ++g) per_cell[g] = model.residuals[g] + outside[g];
        doc.set("effective_length", model.rank);
        doc.set("total_error", model.total_error());
        write_residuals_csv(per_cell, out / "residuals.csv");
        write_curves_csv(model.grid, model.weight_curves, model.curves_per_cell, "weight", out / "curves.csv");
        doc.set("residuals_path", std::string("residuals.csv"));
        doc.set("curves_path", std::string("curves.csv"));
        add_spectral_fields(doc, ds);
        doc.set("box", model.box_radius);
        doc.set("in_box_error", model.error);
        doc.set("out_of_box_energy", model.out_of_box_energy);
        log << "total_error: " << format_double(model.total_error()) << '\n';
    }
    finish_report(doc, out, start);
    return kExitSuccess;
}

int fit_discrete_regime(const FitConfig& cfg, const fs::path& out, std::ostream& log) {
    const auto start = std::chrono::steady_clock::now();
    const DiscreteDataset data = read_discrete_dataset(cfg.input);
    const DiscretePartition partition = load_partition(cfg.partition, data.dim());
    const DiscreteModel model = fit_discrete(data, partition, cfg.rank, cfg.eig_tol);
    write_model(model, partition, out / "model");

    // Unselected eigenvalues per label, summed in within-block rank order.
    std::map<std::int64_t, std::vector<SelectedEigenvalue>> left;
    for (const auto label : partition.labels()) left[label];
    for (std::size_t i = model.num_selected; i < model.eigenvalues.size(); ++i) {
        left[model.eigenvalues[i].label].push_back(model.eigenvalues[i]);
    }
    std::string table = "label,residual\n";
    for (auto& [label, entries] : left) {
        std::sort(entries.begin(), entries.end(),
                  [](const SelectedEigenvalue& x, const SelectedEigenvalue& y) { return x.rank_in_block < y.rank_in_block; });
        double sum = 0.0;
        for (const auto& e : entries) sum += e.value;
        table += std::to_string(label) + "," + format_double(sum) + "\n";
    }
    write_text_file(out / "residuals.csv", table);

    std::size_t nonzero = 0;
    for (const auto& q : model.generators) nonzero += q.empty() ? 0 : 1;

    KeyValueDocument doc;
    doc.set("regime", cfg.regime);
    doc.set("requested_rank", cfg.rank);
    doc.set("effective_length", nonzero);
    doc.set("total_error", model.error);
    doc.set("residuals_path", std::string("residuals.csv"));
    doc.set("curves_path", std::string("model/eigenvalues.csv"));
    doc.set("total_energy", data.total_energy());
    doc.set("num_labels", partition.num_labels());
    log << "total_error: " << format_double(model.error) << '\n';
    finish_report(doc, out, start);
    return kExitSuccess;
}

int cmd_fit(const FitConfig& cfg, bool has_lattice, bool has_box, bool has_partition, std::ostream& out) {
    const std::string& r = cfg.regime;
    if (cfg.rank < 1) throw InputError("--rank must be at least 1");
    if (has_lattice != (r == "extra")) throw InputError("--dual-lattice goes with --regime extra and only with it");
    if (has_box != (r == "pw")) throw InputError("--box goes with --regime pw and only with it");
    if (has_partition != (r == "discrete")) throw InputError("--partition goes with --regime discrete and only with it");
    const fs::path dir = output_dir(cfg.out);
    if (r == "discrete") return fit_discrete_regime(cfg, dir, out);
    return fit_spectral(cfg, dir, out);
}

// ----------------------------------------------------------------- verify

int cmd_verify(const std::string& model_flag, const std::string& data_path, unsigned threads_flag, std::ostream& out) {
    const fs::path dir = model_dir(model_flag);
    const std::string regime = read_model_regime(dir);
    const unsigned threads = worker_count(threads_flag);
    VerificationReport report;

    if (regime == "sis" || regime == "extra") {
        const SpectralDataset data = ingest(data_path);
        std::optional<ExtraInvariantModel> extra;
        std::optional<FittedModel> plain;
        if (regime == "extra") {
            extra = read_extra_model(dir);
        } else {
            plain = read_sis_model(dir);
        }
        const FittedModel& model = extra ? static_cast<const FittedModel&>(*extra) : *plain;
        check_same_grid(model.grid, data.grid());
        const FitOptions options{threads};
        const double optimal = extra ? error_extra(data, extra->lattice, model.rank, options)
                                     : error_sis(data, model.rank, options);
        report = spectral_checks(model.generators, data, model.residuals, model.error,
                                 quadrature(model.residuals, model.grid.cell_volume()), optimal, threads);
        if (extra) report.append(verify_extra_invariance(*extra, extra->lattice));
    } else if (regime == "pw") {
        const SpectralDataset data = ingest(data_path);
        const StoredMultiTile stored = read_multitile_model(dir);
        const MultiTileModel& model = stored.model;
        check_same_grid(model.grid, data.grid());
        report = verify_multitile(model);
        if (report.passed()) {
            const auto layers = decompose_layers(model);
            const bool same = layers.generators.samples() == stored.generators.samples();
            report.add("layer_generators_match", same,
                       same ? "" : "stored generator spectra differ from the layer indicators");
        }
        const auto outside = out_of_box_per_cell(data, model.box_radius);
        std::vector<double> expected(model.residuals.size());
        for (std::size_t g = 0; g < expected.size(); ++g) expected[g] = model.residuals[g] + outside[g];
        const double optimal = fit_multitile(data, model.rank, model.box_radius, FitOptions{threads}).error;
        report.append(spectral_checks(stored.generators, data, expected, model.error,
                                      quadrature(model.residuals, model.grid.cell_volume()), optimal, threads));
        // The stored out-of-box energy must match the data as well.
        const double oob = quadrature(outside, data.grid().cell_volume());
        report.add("out_of_box_energy", std::abs(oob - model.out_of_box_energy) <= 1e-12 * std::max(1.0, oob),
                   "data " + format_double(oob) + ", stored " + format_double(model.out_of_box_energy));
    } else if (regime == "discrete") {
        const DiscreteDataset data = read_discrete_dataset(data_path);
        const StoredDiscrete stored = read_discrete_model(dir);
        if (data.dim() != stored.model.dim) throw InputError("dataset dimension does not match the model");
        report = verify_discrete(data, stored.partition, stored.model);
        const double fresh = error_discrete(data, stored.partition, stored.model.rank);
        report.add("stored_error", std::abs(fresh - stored.model.error) <= 1e-9 * std::max(1.0, data.total_energy()),
                   "recomputed " + format_double(fresh) + ", stored " + format_double(stored.model.error));
    } else {
        throw InputError("unknown model regime '" + regime + "'");
    }

    out << report.to_text();
    out << (report.passed() ? "verification passed\n" : "verification FAILED\n");
    return report.passed() ? kExitSuccess : kExitVerificationFailed;
}

// ---------------------------------------------------------------- compare

struct CompareConfig {
    std::string input;
    std::vector<std::string> regimes{"sis"};
    std::vector<int> ranks{1, 2, 3, 4};
    std::vector<int> boxes;
    std::string dual_lattice;
    std::string partition;
    std::string out;
    unsigned threads = 1;
};

struct CompareRow {
    std::string regime;
    int rank = 0;
    int box = -1;
    double error = 0.0;
};

int cmd_compare(const CompareConfig& cfg, std::ostream& out) {
    for (const auto& r : cfg.regimes) {
        if (r != "sis" && r != "extra" && r != "pw" && r != "discrete") throw InputError("unknown regime '" + r + "'");
    }
    const auto has = [&](const char* r) { return std::find(cfg.regimes.begin(), cfg.regimes.end(), r) != cfg.regimes.end(); };
    if (has("discrete") && cfg.regimes.size() > 1) throw InputError("the discrete regime cannot be mixed with grid regimes");
    if (has("extra") != !cfg.dual_lattice.empty()) throw InputError("--dual-lattice goes with the extra regime");
    if (has("pw") != !cfg.boxes.empty()) throw InputError("--boxes goes with the pw regime");
    if (has("discrete") != !cfg.partition.empty()) throw InputError("--partition goes with the discrete regime");
    if (cfg.ranks.empty()) throw InputError("--ranks needs at least one value");
    std::vector<int> ranks = cfg.ranks;
    for (const int r : ranks) {
        if (r < 1) throw InputError("ranks must be at least 1");
    }
    std::sort(ranks.begin(), ranks.end());
    ranks.erase(std::unique(ranks.begin(), ranks.end()), ranks.end());

    std::vector<CompareRow> rows;
    double energy = 0.0;
    if (has("discrete")) {
        const DiscreteDataset data = read_discrete_dataset(cfg.input);
        const DiscretePartition partition = load_partition(cfg.partition, data.dim());
        energy = data.total_energy();
        for (const int r : ranks) {
            rows.push_back({"discrete", r, -1, error_discrete(data, partition, static_cast<std::size_t>(r))});
        }
    } else {
        const SpectralDataset ds = ingest(cfg.input);
        const FitOptions options{worker_count(cfg.threads)};
        energy = sum_of(energy_report(ds));
        std::vector<int> boxes = cfg.boxes;
        if (!std::is_sorted(boxes.begin(), boxes.end())) throw InputError("--boxes must be ascending");
        for (const auto& regime : cfg.regimes) {
            for (const int r : ranks) {
                const auto rank = static_cast<std::size_t>(r);
                if (regime == "sis") {
                    rows.push_back({regime, r, -1, error_sis(ds, rank, options)});
                } else if (regime == "extra") {
                    const DualLattice lattice(parse_integer_matrix(cfg.dual_lattice));
                    rows.push_back({regime, r, -1, error_extra(ds, lattice, rank, options)});
                } else {
                    // Boxes too small to hold `rank` translations are skipped.
                    std::vector<int> feasible;
                    for (const int b : boxes) {
                        if (std::pow(2.0 * b + 1.0, ds.grid().dim()) >= static_cast<double>(rank)) feasible.push_back(b);
                    }
                    if (feasible.empty()) continue;
                    const auto series = error_multitile_series(ds, rank, feasible, options);
                    for (std::size_t b = 0; b < feasible.size(); ++b) rows.push_back({regime, r, feasible[b], series[b]});
                }
            }
        }
    }

    const double tol = 1e-12 * std::max(energy, 1.0);
    std::vector<std::string> defects;
    const auto find = [&](const std::string& regime, int rank, int box) -> const CompareRow* {
        for (const auto& row : rows) {
            if (row.regime == regime && row.rank == rank && row.box == box) return &row;
        }
        return nullptr;
    };
    for (const auto& row : rows) {
        const auto where = row.regime + " rank " + std::to_string(row.rank) +
                           (row.box >= 0 ? " box " + std::to_string(row.box) : std::string());
        // Non-increasing in rank.
        const auto rit = std::upper_bound(ranks.begin(), ranks.end(), row.rank);
        if (rit != ranks.end()) {
            if (const auto* next = find(row.regime, *rit, row.box); next && next->error > row.error + tol) {
                defects.push_back(where + ": error rises to " + format_double(next->error) + " at rank " +
                                  std::to_string(*rit));
            }
        }
        // Non-increasing in box.
        if (row.box >= 0) {
            const auto bit = std::upper_bound(cfg.boxes.begin(), cfg.boxes.end(), row.box);
            if (bit != cfg.boxes.end()) {
                if (const auto* next = find(row.regime, row.rank, *bit); next && next->error > row.error + tol) {
                    defects.push_back(where + ": error rises to " + format_double(next->error) + " at box " +
                                      std::to_string(*bit));
                }
            }
        }
        // Class nesting: the restricted regimes cannot beat the plain SIS fit.
        if (row.regime == "extra" || row.regime == "pw") {
            if (const auto* base = find("sis", row.rank, -1); base && row.error < base->error - tol) {
                defects.push_back(where + ": error " + format_double(row.error) + " below sis error " +
                                  format_double(base->error));
            }
        }
    }

    std::string table = "regime,rank,box,error\n";
    for (const auto& row : rows) {
        table += row.regime + "," + std::to_string(row.rank) + "," + (row.box >= 0 ? std::to_string(row.box) : "") + "," +
                 format_double(row.error) + "\n";
    }
    const fs::path dir = output_dir(cfg.out);
    write_text_file(dir / "compare.csv", table);
    KeyValueDocument doc;
    doc.set("rows", rows.size());
    doc.set("energy", energy);
    doc.set("tolerance", tol);
    doc.set("table_path", std::string("compare.csv"));
    doc.set("defects", defects.size());
    for (std::size_t i = 0; i < defects.size(); ++i) doc.set("defect_" + std::to_string(i + 1), defects[i]);
    doc.write(dir / "compare.txt");

    out << table;
    for (const auto& d : defects) out << "DEFECT " << d << '\n';
    return defects.empty() ? kExitSuccess : kExitVerificationFailed;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Nearest shift-invariant subspaces from sampled Fourier data", "sisapprox"};
    app.require_subcommand(1);

    SynthConfig synth;
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic dataset from a closed-form family");
    synth_cmd->add_option("--family", synth.family, "gaussian, bspline or boxcar")->required();
    synth_cmd->add_option("--sigma", synth.sigma, "Gaussian scales, one function each")->delimiter(',');
    synth_cmd->add_option("--order", synth.order, "B-spline orders, one function each")->delimiter(',');
    synth_cmd->add_option("--a", synth.a, "Boxcar half-widths, one function each")->delimiter(',');
    synth_cmd->add_option("--dim", synth.dim, "Dimension d")->capture_default_str();
    synth_cmd->add_option("--cells", synth.cells, "Grid cells per dimension (even)")->capture_default_str();
    synth_cmd->add_option("--trunc", synth.trunc, "Translation truncation radius")->capture_default_str();
    synth_cmd->add_option("--out", synth.out, "Output directory (default $SISAPPROX_OUT)");
    synth_cmd->add_option("--format", synth.format, "binary-c64le or csv")->capture_default_str();
    synth_cmd->add_option("--stem", synth.stem, "File name stem")->capture_default_str();

    FitConfig fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit the optimal space in one regime");
    fit_cmd->add_option("--regime", fit.regime, "sis, extra, pw or discrete")
        ->required()
        ->check(CLI::IsMember({"sis", "extra", "pw", "discrete"}));
    fit_cmd->add_option("--input", fit.input, "Dataset manifest, or discrete dataset file")->required();
    fit_cmd->add_option("--rank", fit.rank, "Requested length")->required();
    auto* lattice_opt = fit_cmd->add_option("--dual-lattice", fit.dual_lattice, "Dual lattice basis, e.g. \"2 0;0 1\"");
    auto* box_opt = fit_cmd->add_option("--box", fit.box, "Box radius for the pw regime");
    auto* partition_opt = fit_cmd->add_option("--partition", fit.partition, "Partition file or \"lattice: <matrix>\"");
    fit_cmd->add_option("--out", fit.out, "Output directory (default $SISAPPROX_OUT)");
    fit_cmd->add_option("--threads", fit.threads, "Worker cap, 0 for all cores")->capture_default_str();
    fit_cmd->add_option("--eig-tol", fit.eig_tol, "Eigensolver acceptance tolerance")->capture_default_str();
    fit_cmd->add_option("--rank-tol", fit.rank_tol, "Relative eigenvalue cut for zero generators")->capture_default_str();

    std::string verify_model;
    std::string verify_data;
    unsigned verify_threads = 1;
    auto* verify_cmd = app.add_subcommand("verify", "Check a stored model against its dataset");
    verify_cmd->add_option("--model", verify_model, "Model directory (or the fit output directory)")->required();
    verify_cmd->add_option("--data", verify_data, "Dataset manifest, or discrete dataset file")->required();
    verify_cmd->add_option("--threads", verify_threads, "Worker cap, 0 for all cores")->capture_default_str();

    CompareConfig compare;
    auto* compare_cmd = app.add_subcommand("compare", "Tabulate errors across ranks, boxes and regimes");
    compare_cmd->add_option("--input", compare.input, "Dataset manifest, or discrete dataset file")->required();
    compare_cmd->add_option("--regimes", compare.regimes, "Regimes to compare")->delimiter(',')->capture_default_str();
    compare_cmd->add_option("--ranks", compare.ranks, "Ranks to sweep")->delimiter(',')->capture_default_str();
    compare_cmd->add_option("--boxes", compare.boxes, "Box radii for the pw regime, ascending")->delimiter(',');
    compare_cmd->add_option("--dual-lattice", compare.dual_lattice, "Dual lattice basis for the extra regime");
    compare_cmd->add_option("--partition", compare.partition, "Partition for the discrete regime");
    compare_cmd->add_option("--out", compare.out, "Output directory (default $SISAPPROX_OUT)");
    compare_cmd->add_option("--threads", compare.threads, "Worker cap, 0 for all cores")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitSuccess : kExitUsage;
    }

    try {
        if (synth_cmd->parsed()) return cmd_synth(synth, out);
        if (fit_cmd->parsed()) {
            return cmd_fit(fit, lattice_opt->count() > 0, box_opt->count() > 0, partition_opt->count() > 0, out);
        }
        if (verify_cmd->parsed()) return cmd_verify(verify_model, verify_data, verify_threads, out);
        if (compare_cmd->parsed()) return cmd_compare(compare, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace sisapprox
