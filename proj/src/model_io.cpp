#include "sisapprox/model_io.hpp"

#include <cctype>
#include <charconv>
#include <algorithm>
#include <map>
#include <sstream>

#include "sisapprox/error.hpp"
#include "sisapprox/keyvalue.hpp"

namespace sisapprox {

namespace {

namespace fs = std::filesystem;

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

long long parse_int(const std::string& text, const std::string& where) {
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw InputError(where + ": expected an integer, got '" + text + "'");
    }
    return out;
}

double parse_real(const std::string& text, const std::string& where) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw InputError(where + ": expected a number, got '" + text + "'");
    }
    return out;
}

KeyValueDocument base_document(const std::string& regime) {
    KeyValueDocument doc;
    doc.set("format", std::string(kModelFormat));
    doc.set("regime", regime);
    return doc;
}

void set_grid(KeyValueDocument& doc, const SpectralGrid& grid) {
    doc.set("dim", grid.dim());
    doc.set("cells_per_dim", grid.cells_per_dim());
    doc.set("trunc_radius", grid.trunc_radius());
}

SpectralGrid get_grid(const KeyValueDocument& doc) {
    return SpectralGrid(static_cast<int>(doc.get_int("dim")), static_cast<int>(doc.get_int("cells_per_dim")),
                        static_cast<int>(doc.get_int("trunc_radius")));
}

KeyValueDocument open_model(const fs::path& dir, const std::string& regime) {
    const auto doc = KeyValueDocument::read(dir / "model.txt");
    if (doc.get("format") != kModelFormat) {
        throw InputError((dir / "model.txt").string() + ": unsupported model format '" + doc.get("format") + "'");
    }
    if (doc.get("regime") != regime) {
        throw InputError((dir / "model.txt").string() + ": expected a " + regime + " model, found " +
                         doc.get("regime"));
    }
    return doc;
}

std::size_t get_size(const KeyValueDocument& doc, const std::string& key) {
    const long long v = doc.get_int(key);
    if (v < 0) throw InputError("field '" + key + "' must be nonnegative");
    return static_cast<std::size_t>(v);
}

SpectralDataset read_generators(const fs::path& dir, const KeyValueDocument& doc, const SpectralGrid& grid,
                                std::size_t rank) {
    SpectralDataset gens = ingest(dir / doc.get("generators_manifest"));
    if (!(gens.grid() == grid)) throw InputError("generator payload grid does not match model.txt");
    if (gens.num_functions() != rank) {
        throw InputError("generator payload holds " + std::to_string(gens.num_functions()) + " generators, rank is " +
                         std::to_string(rank));
    }
    return gens;
}

void write_spectral_common(const FittedModel& model, const fs::path& dir, KeyValueDocument& doc) {
    set_grid(doc, model.grid);
    doc.set("rank", model.rank);
    doc.set("effective_length", model.effective_length);
    doc.set("error", model.error);
    write_dataset(model.generators, dir, "generators");
    doc.set("generators_manifest", std::string("generators.manifest"));
    write_residuals_csv(model.residuals, dir / "residuals.csv");
    doc.set("residuals_path", std::string("residuals.csv"));
    write_curves_csv(model.grid, model.eigenvalue_curves, model.curves_per_cell, "lambda", dir / "curves.csv");
    doc.set("curves_path", std::string("curves.csv"));
}

FittedModel read_spectral_common(const fs::path& dir, const KeyValueDocument& doc) {
    const SpectralGrid grid = get_grid(doc);
    const std::size_t rank = get_size(doc, "rank");
    if (rank < 1) throw InputError("model rank must be at least 1");
    std::size_t per_cell = 0;
    auto curves = read_curves_csv(grid, dir / doc.get("curves_path"), per_cell);
    std::vector<double> selected(grid.num_cells() * rank, 0.0);
    for (std::size_t g = 0; g < grid.num_cells(); ++g) {
        for (std::size_t s = 0; s < std::min(rank, per_cell); ++s) selected[g * rank + s] = curves[g * per_cell + s];
    }
    return FittedModel{grid,
                       rank,
                       std::move(selected),
                       read_generators(dir, doc, grid, rank),
                       read_residuals_csv(dir / doc.get("residuals_path"), grid.num_cells()),
                       doc.get_double("error"),
                       get_size(doc, "effective_length"),
                       std::move(curves),
                       per_cell};
}

std::string point_fields(const IntPoint& p) {
    std::string out;
    for (std::size_t c = 0; c < p.size(); ++c) out += (c ? "," : "") + std::to_string(p[c]);
    return out;
}

}  // namespace

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path) {
    std::istringstream in(read_text_file(path));
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        const std::string body = trim(line);
        if (body.empty() || body.front() == '#' || std::isalpha(static_cast<unsigned char>(body.front()))) continue;
        std::vector<std::string> fields;
        std::istringstream fs_in(body);
        std::string field;
        while (std::getline(fs_in, field, ',')) fields.push_back(trim(field));
        rows.push_back(std::move(fields));
    }
    return rows;
}

void write_curves_csv(const SpectralGrid& grid, const std::vector<double>& values, std::size_t per_cell,
                      const std::string& column_prefix, const fs::path& path) {
    if (values.size() != grid.num_cells() * per_cell) throw InputError("curve table has the wrong size");
    std::string out = "g";
    for (int c = 0; c < grid.dim(); ++c) out += ",omega_" + std::to_string(c + 1);
    for (std::size_t i = 0; i < per_cell; ++i) out += "," + column_prefix + "_" + std::to_string(i + 1);
    out += '\n';
    for (std::size_t g = 0; g < grid.num_cells(); ++g) {
        out += std::to_string(g);
        for (const double w : grid.cell_center(g)) out += "," + format_double(w);
        for (std::size_t i = 0; i < per_cell; ++i) out += "," + format_double(values[g * per_cell + i]);
        out += '\n';
    }
    write_text_file(path, out);
}

std::vector<double> read_curves_csv(const SpectralGrid& grid, const fs::path& path, std::size_t& per_cell) {
    const auto rows = read_csv_rows(path);
    if (rows.size() != grid.num_cells()) {
        throw InputError(path.string() + ": expected " + std::to_string(grid.num_cells()) + " rows, found " +
                         std::to_string(rows.size()));
    }
    const std::size_t lead = 1 + static_cast<std::size_t>(grid.dim());
    per_cell = rows.empty() || rows[0].size() < lead ? 0 : rows[0].size() - lead;
    std::vector<double> values;
    values.reserve(rows.size() * per_cell);
    for (std::size_t g = 0; g < rows.size(); ++g) {
        const std::string where = path.string() + " row " + std::to_string(g);
        if (rows[g].size() != lead + per_cell) throw InputError(where + ": wrong column count");
        if (parse_int(rows[g][0], where) != static_cast<long long>(g)) throw InputError(where + ": cells out of order");
        for (std::size_t i = 0; i < per_cell; ++i) values.push_back(parse_real(rows[g][lead + i], where));
    }
    return values;
}

void write_residuals_csv(const std::vector<double>& residuals, const fs::path& path) {
    std::string out = "g,residual\n";
    for (std::size_t g = 0; g < residuals.size(); ++g) out += std::to_string(g) + "," + format_double(residuals[g]) + '\n';
    write_text_file(path, out);
}

std::vector<double> read_residuals_csv(const fs::path& path, std::size_t expected_cells) {
    const auto rows = read_csv_rows(path);
    if (rows.size() != expected_cells) {
        throw InputError(path.string() + ": expected " + std::to_string(expected_cells) + " rows, found " +
                         std::to_string(rows.size()));
    }
    std::vector<double> out(expected_cells, 0.0);
    for (std::size_t g = 0; g < rows.size(); ++g) {
        const std::string where = path.string() + " row " + std::to_string(g);
        if (rows[g].size() != 2) throw InputError(where + ": expected g,residual");
        if (parse_int(rows[g][0], where) != static_cast<long long>(g)) throw InputError(where + ": cells out of order");
        out[g] = parse_real(rows[g][1], where);
    }
    return out;
}

std::string format_partition(const DiscretePartition& partition) {
    if (partition.lattice()) return "lattice: " + format_integer_matrix(partition.lattice()->basis()) + "\n";
    std::string out;
    for (const auto& [pos, label] : partition.explicit_map()) out += point_fields(pos) + "," + std::to_string(label) + "\n";
    return out;
}

std::string read_model_regime(const fs::path& dir) {
    const auto doc = KeyValueDocument::read(dir / "model.txt");
    if (doc.get("format") != kModelFormat) {
        throw InputError((dir / "model.txt").string() + ": unsupported model format '" + doc.get("format") + "'");
    }
    return doc.get("regime");
}

// -------------------------------------------------------------------- sis

void write_model(const FittedModel& model, const fs::path& dir) {
    auto doc = base_document("sis");
    write_spectral_common(model, dir, doc);
    doc.write(dir / "model.txt");
}

FittedModel read_sis_model(const fs::path& dir) {
    return read_spectral_common(dir, open_model(dir, "sis"));
}

// ------------------------------------------------------------------ extra

void write_model(const ExtraInvariantModel& model, const fs::path& dir) {
    auto doc = base_document("extra");
    write_spectral_common(model, dir, doc);
    doc.set("dual_lattice", format_integer_matrix(model.lattice.basis()));
    std::string table = "g,s,label,rank\n";
    for (std::size_t g = 0; g < model.grid.num_cells(); ++g) {
        for (std::size_t s = 0; s < model.rank; ++s) {
            table += std::to_string(g) + "," + std::to_string(s) + "," + std::to_string(model.home_coset[g * model.rank + s]) +
                     "," + std::to_string(model.block_rank[g * model.rank + s]) + "\n";
        }
    }
    write_text_file(dir / "home_coset.csv", table);
    doc.set("home_coset_path", std::string("home_coset.csv"));
    doc.write(dir / "model.txt");
}

ExtraInvariantModel read_extra_model(const fs::path& dir) {
    const auto doc = open_model(dir, "extra");
    FittedModel base = read_spectral_common(dir, doc);
    DualLattice lattice(parse_integer_matrix(doc.get("dual_lattice")));
    if (lattice.dim() != base.grid.dim()) throw InputError("dual lattice dimension does not match the grid");
    const std::size_t n = base.grid.num_cells() * base.rank;
    std::vector<std::int64_t> home(n, ExtraInvariantModel::kNoCoset);
    std::vector<std::int64_t> brank(n, ExtraInvariantModel::kNoCoset);
    const fs::path path = dir / doc.get("home_coset_path");
    const auto rows = read_csv_rows(path);
    if (rows.size() != n) throw InputError(path.string() + ": expected " + std::to_string(n) + " rows");
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::string where = path.string() + " row " + std::to_string(r);
        if (rows[r].size() != 4) throw InputError(where + ": expected g,s,label,rank");
        const long long g = parse_int(rows[r][0], where);
        const long long s = parse_int(rows[r][1], where);
        if (g < 0 || s < 0 || static_cast<std::size_t>(g) >= base.grid.num_cells() ||
            static_cast<std::size_t>(s) >= base.rank) {
            throw InputError(where + ": cell or generator index out of range");
        }
        const std::size_t slot = static_cast<std::size_t>(g) * base.rank + static_cast<std::size_t>(s);
        home[slot] = parse_int(rows[r][2], where);
        brank[slot] = parse_int(rows[r][3], where);
    }
    return ExtraInvariantModel{std::move(base), std::move(lattice), std::move(home), std::move(brank)};
}

// --------------------------------------------------------------------- pw

void write_model(const MultiTileModel& model, const fs::path& dir) {
    auto doc = base_document("pw");
    set_grid(doc, model.grid);
    doc.set("rank", model.rank);
    doc.set("box", model.box_radius);
    doc.set("error", model.error);
    doc.set("out_of_box_energy", model.out_of_box_energy);
    doc.set("total_error", model.total_error());

    std::string table = "g";
    for (std::size_t s = 0; s < model.rank; ++s) {
        for (int c = 0; c < model.grid.dim(); ++c) table += ",k" + std::to_string(s + 1) + "_" + std::to_string(c + 1);
    }
    table += '\n';
    for (std::size_t g = 0; g < model.chosen.size(); ++g) {
        table += std::to_string(g);
        for (const auto& k : model.chosen[g]) table += "," + point_fields(k);
        table += '\n';
    }
    write_text_file(dir / "chosen.csv", table);
    doc.set("chosen_path", std::string("chosen.csv"));

    write_dataset(decompose_layers(model).generators, dir, "generators");
    doc.set("generators_manifest", std::string("generators.manifest"));
    write_residuals_csv(model.residuals, dir / "residuals.csv");
    doc.set("residuals_path", std::string("residuals.csv"));
    write_curves_csv(model.grid, model.weight_curves, model.curves_per_cell, "weight", dir / "curves.csv");
    doc.set("curves_path", std::string("curves.csv"));
    doc.write(dir / "model.txt");
}

StoredMultiTile read_multitile_model(const fs::path& dir) {
    const auto doc = open_model(dir, "pw");
    const SpectralGrid grid = get_grid(doc);
    const std::size_t rank = get_size(doc, "rank");
    if (rank < 1) throw InputError("model rank must be at least 1");
    const auto dim = static_cast<std::size_t>(grid.dim());

    const fs::path path = dir / doc.get("chosen_path");
    const auto rows = read_csv_rows(path);
    if (rows.size() != grid.num_cells()) {
        throw InputError(path.string() + ": expected " + std::to_string(grid.num_cells()) + " rows");
    }
    std::vector<std::vector<IntPoint>> chosen(grid.num_cells());
    for (std::size_t g = 0; g < rows.size(); ++g) {
        const std::string where = path.string() + " row " + std::to_string(g);
        if (rows[g].empty() || (rows[g].size() - 1) % dim != 0) throw InputError(where + ": malformed row");
        if (parse_int(rows[g][0], where) != static_cast<long long>(g)) throw InputError(where + ": cells out of order");
        for (std::size_t i = 1; i < rows[g].size(); i += dim) {
            IntPoint k(dim);
            for (std::size_t c = 0; c < dim; ++c) k[c] = parse_int(rows[g][i + c], where);
            chosen[g].push_back(std::move(k));
        }
    }
    std::size_t per_cell = 0;
    auto curves = read_curves_csv(grid, dir / doc.get("curves_path"), per_cell);
    MultiTileModel model{grid,
                         rank,
                         static_cast<int>(doc.get_int("box")),
                         std::move(chosen),
                         read_residuals_csv(dir / doc.get("residuals_path"), grid.num_cells()),
                         doc.get_double("error"),
                         doc.get_double("out_of_box_energy"),
                         std::move(curves),
                         per_cell};
    SpectralDataset gens = read_generators(dir, doc, grid, rank);
    return {std::move(model), std::move(gens)};
}

// --------------------------------------------------------------- discrete

void write_model(const DiscreteModel& model, const DiscretePartition& partition, const fs::path& dir) {
    auto doc = base_document("discrete");
    doc.set("dim", model.dim);
    doc.set("rank", model.rank);
    doc.set("num_selected", model.num_selected);
    doc.set("error", model.error);

    std::string gens = "# s, position, re, im\n";
    for (std::size_t s = 0; s < model.generators.size(); ++s) {
        for (const auto& e : model.generators[s]) {
            gens += std::to_string(s) + "," + point_fields(e.position) + "," + format_double(e.value.real()) + "," +
                    format_double(e.value.imag()) + "\n";
        }
    }
    write_text_file(dir / "generators.txt", gens);
    doc.set("generators_path", std::string("generators.txt"));

    std::string eig = "order,label,rank,value\n";
    for (std::size_t i = 0; i < model.eigenvalues.size(); ++i) {
        const auto& e = model.eigenvalues[i];
        eig += std::to_string(i) + "," + std::to_string(e.label) + "," + std::to_string(e.rank_in_block) + "," +
               format_double(e.value) + "\n";
    }
    write_text_file(dir / "eigenvalues.csv", eig);
    doc.set("eigenvalues_path", std::string("eigenvalues.csv"));

    write_text_file(dir / "partition.txt", format_partition(partition));
    doc.set("partition_path", std::string("partition.txt"));
    doc.write(dir / "model.txt");
}

StoredDiscrete read_discrete_model(const fs::path& dir) {
    const auto doc = open_model(dir, "discrete");
    DiscreteModel model;
    model.dim = static_cast<int>(doc.get_int("dim"));
    if (model.dim < 1) throw InputError("model dimension must be positive");
    model.rank = get_size(doc, "rank");
    model.num_selected = get_size(doc, "num_selected");
    model.error = doc.get_double("error");
    model.generators.resize(model.rank);
    const auto dim = static_cast<std::size_t>(model.dim);

    const fs::path gpath = dir / doc.get("generators_path");
    for (const auto& row : read_csv_rows(gpath)) {
        const std::string where = gpath.string();
        if (row.size() != dim + 3) throw InputError(where + ": expected s, position, re, im");
        const long long s = parse_int(row[0], where);
        if (s < 0 || static_cast<std::size_t>(s) >= model.rank) throw InputError(where + ": generator index out of range");
        SequenceEntry e;
        for (std::size_t c = 0; c < dim; ++c) e.position.push_back(parse_int(row[1 + c], where));
        e.value = Complex(parse_real(row[1 + dim], where), parse_real(row[2 + dim], where));
        model.generators[static_cast<std::size_t>(s)].push_back(std::move(e));
    }
    for (auto& q : model.generators) {
        std::sort(q.begin(), q.end(), [](const SequenceEntry& a, const SequenceEntry& b) { return a.position < b.position; });
    }

    const fs::path epath = dir / doc.get("eigenvalues_path");
    for (const auto& row : read_csv_rows(epath)) {
        if (row.size() != 4) throw InputError(epath.string() + ": expected order,label,rank,value");
        model.eigenvalues.push_back({parse_real(row[3], epath.string()), parse_int(row[1], epath.string()),
                                     static_cast<std::size_t>(parse_int(row[2], epath.string()))});
    }
    DiscretePartition partition = read_partition(dir / doc.get("partition_path"), model.dim);
    return {std::move(model), std::move(partition)};
}

}  // namespace sisapprox
