#include "sisapprox/discrete.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "sisapprox/error.hpp"
#include "sisapprox/fiber_ops.hpp"
#include "sisapprox/keyvalue.hpp"

namespace sisapprox {

namespace {

constexpr double kRankRelTol = 1e-10;

std::string point_text(const IntPoint& p) {
    std::string out = "(";
    for (std::size_t c = 0; c < p.size(); ++c) out += (c ? "," : "") + std::to_string(p[c]);
    return out + ")";
}

std::vector<std::string> split_fields(const std::string& line) {
    std::string normalized = line;
    std::replace(normalized.begin(), normalized.end(), ',', ' ');
    std::istringstream in(normalized);
    std::vector<std::string> out;
    std::string token;
    while (in >> token) out.push_back(token);
    return out;
}

bool skip_line(const std::string& line) {
    const auto first = line.find_first_not_of(" \t\r");
    return first == std::string::npos || line[first] == '#' ||
           std::isalpha(static_cast<unsigned char>(line[first]));
}

struct Block {
    RealVector eigenvalues;
    ComplexMatrix eigenvectors;
};

// Eigendecomposition of every block Gramian, in label order.
std::vector<Block> decompose_blocks(const DiscreteDataset& data, const DiscretePartition& partition,
                                    double eig_tol) {
    std::vector<Block> blocks;
    blocks.reserve(partition.num_labels());
    for (const std::int64_t label : partition.labels()) {
        EigenSystem eig = eig_hermitian(block_gramian(data, partition, label), eig_tol);
        eig.eigenvalues = eig.eigenvalues.cwiseMax(0.0);
        blocks.push_back({std::move(eig.eigenvalues), std::move(eig.eigenvectors)});
    }
    return blocks;
}

struct Selection {
    std::vector<SelectedEigenvalue> order;
    std::size_t num_selected = 0;
    double error = 0.0;
};

Selection select(const std::vector<Block>& blocks, const DiscretePartition& partition, std::size_t rank) {
    Selection sel;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (Eigen::Index j = 0; j < blocks[b].eigenvalues.size(); ++j) {
            sel.order.push_back({blocks[b].eigenvalues(j), partition.labels()[b], static_cast<std::size_t>(j)});
        }
    }
    std::stable_sort(sel.order.begin(), sel.order.end(),
                     [](const SelectedEigenvalue& a, const SelectedEigenvalue& b) { return a.value > b.value; });
    sel.num_selected = std::min(rank, sel.order.size());

    // Per-block prefix lengths, then the tail sum in (block, rank) order so
    // the arithmetic matches the allocation formula term for term.
    std::vector<std::size_t> kept(blocks.size(), 0);
    for (std::size_t s = 0; s < sel.num_selected; ++s) ++kept[partition.index_of_label(sel.order[s].label)];
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (Eigen::Index j = static_cast<Eigen::Index>(kept[b]); j < blocks[b].eigenvalues.size(); ++j) {
            sel.error += blocks[b].eigenvalues(j);
        }
    }
    return sel;
}

void check_partition_covers(const DiscreteDataset& data, const DiscretePartition& partition) {
    if (data.dim() != partition.dim()) {
        throw InputError("partition dimension " + std::to_string(partition.dim()) + " does not match data dimension " +
                         std::to_string(data.dim()));
    }
    for (const auto& p : data.support()) partition.class_of(p);
}

}  // namespace

// ------------------------------------------------------------------ dataset

DiscreteDataset::DiscreteDataset(int dim, std::vector<std::vector<SequenceEntry>> sequences)
    : dim_(dim), sequences_(std::move(sequences)) {
    if (dim < 1) throw InputError("dimension must be positive");
    if (sequences_.empty()) throw InputError("discrete dataset needs at least one sequence");
    std::set<IntPoint> all;
    for (std::size_t j = 0; j < sequences_.size(); ++j) {
        auto& seq = sequences_[j];
        std::sort(seq.begin(), seq.end(),
                  [](const SequenceEntry& a, const SequenceEntry& b) { return a.position < b.position; });
        for (std::size_t i = 0; i < seq.size(); ++i) {
            const auto& e = seq[i];
            if (static_cast<int>(e.position.size()) != dim) {
                throw InputError("sequence " + std::to_string(j) + ": position " + point_text(e.position) +
                                 " has wrong dimension");
            }
            if (!std::isfinite(e.value.real()) || !std::isfinite(e.value.imag())) {
                throw InputError("sequence " + std::to_string(j) + ": non-finite value at " + point_text(e.position));
            }
            if (i > 0 && seq[i - 1].position == e.position) {
                throw InputError("sequence " + std::to_string(j) + ": duplicate position " + point_text(e.position));
            }
            all.insert(e.position);
        }
    }
    support_.assign(all.begin(), all.end());
    if (!support_.empty()) {
        support_min_ = support_max_ = support_.front();
        for (const auto& p : support_) {
            for (int c = 0; c < dim; ++c) {
                const auto ci = static_cast<std::size_t>(c);
                support_min_[ci] = std::min(support_min_[ci], p[ci]);
                support_max_[ci] = std::max(support_max_[ci], p[ci]);
            }
        }
    }
}

ComplexMatrix DiscreteDataset::dense() const {
    ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(sequences_.size()),
                                            static_cast<Eigen::Index>(support_.size()));
    for (std::size_t j = 0; j < sequences_.size(); ++j) {
        for (const auto& e : sequences_[j]) {
            const auto col = std::lower_bound(support_.begin(), support_.end(), e.position) - support_.begin();
            out(static_cast<Eigen::Index>(j), col) = e.value;
        }
    }
    return out;
}

double DiscreteDataset::total_energy() const {
    double sum = 0.0;
    for (const auto& seq : sequences_) {
        for (const auto& e : seq) sum += std::norm(e.value);
    }
    return sum;
}

// ---------------------------------------------------------------- partition

DiscretePartition DiscretePartition::from_lattice(const DualLattice& lattice) {
    DiscretePartition p;
    p.dim_ = lattice.dim();
    p.lattice_ = lattice;
    p.labels_.resize(static_cast<std::size_t>(lattice.index()));
    for (std::size_t i = 0; i < p.labels_.size(); ++i) p.labels_[i] = static_cast<std::int64_t>(i);
    return p;
}

DiscretePartition DiscretePartition::from_map(int dim, std::map<IntPoint, std::int64_t> labels) {
    if (dim < 1) throw InputError("dimension must be positive");
    DiscretePartition p;
    p.dim_ = dim;
    std::set<std::int64_t> values;
    for (const auto& [pos, label] : labels) {
        if (static_cast<int>(pos.size()) != dim) {
            throw InputError("partition position " + point_text(pos) + " has wrong dimension");
        }
        values.insert(label);
    }
    if (values.empty()) throw InputError("explicit partition is empty");
    p.labels_.assign(values.begin(), values.end());
    p.map_ = std::move(labels);
    return p;
}

std::size_t DiscretePartition::index_of_label(std::int64_t label) const {
    const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
    if (it == labels_.end() || *it != label) throw InputError("unknown partition label " + std::to_string(label));
    return static_cast<std::size_t>(it - labels_.begin());
}

std::size_t DiscretePartition::class_of(const IntPoint& position) const {
    if (lattice_) return lattice_->coset_of(position).index;
    const auto it = map_.find(position);
    if (it == map_.end()) throw InputError("position " + point_text(position) + " has no partition label");
    return index_of_label(it->second);
}

// --------------------------------------------------------------- operations

HermitianMatrix block_gramian(const DiscreteDataset& data, const DiscretePartition& partition, std::int64_t label) {
    const std::size_t block = partition.index_of_label(label);
    check_partition_covers(data, partition);
    const std::size_t m = data.num_sequences();
    if (static_cast<Eigen::Index>(m) > HermitianMatrix::kMaxOrder) throw InputError("at most 256 sequences");
    const ComplexMatrix dense = data.dense();
    std::vector<Eigen::Index> cols;
    for (std::size_t c = 0; c < data.support().size(); ++c) {
        if (partition.class_of(data.support()[c]) == block) cols.push_back(static_cast<Eigen::Index>(c));
    }
    ComplexMatrix g = ComplexMatrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        for (Eigen::Index j = i; j < g.cols(); ++j) {
            Complex sum = 0.0;
            for (const Eigen::Index c : cols) sum += dense(i, c) * std::conj(dense(j, c));
            if (i == j) sum = sum.real();
            g(i, j) = sum;
            g(j, i) = std::conj(sum);
        }
    }
    return HermitianMatrix(g);
}

DiscreteModel fit_discrete(const DiscreteDataset& data, const DiscretePartition& partition, std::size_t rank,
                           double eig_tol) {
    if (rank < 1) throw InputError("rank must be at least 1");
    check_partition_covers(data, partition);
    const auto blocks = decompose_blocks(data, partition, eig_tol);
    const Selection sel = select(blocks, partition, rank);

    DiscreteModel model;
    model.dim = data.dim();
    model.rank = rank;
    model.eigenvalues = sel.order;
    model.num_selected = sel.num_selected;
    model.error = sel.error;
    model.generators.resize(rank);

    const ComplexMatrix dense = data.dense();
    const auto& support = data.support();
    std::vector<std::size_t> class_of(support.size());
    for (std::size_t c = 0; c < support.size(); ++c) class_of[c] = partition.class_of(support[c]);

    // Eigenvalues at roundoff level relative to the largest give zero generators.
    const double cut = sel.order.empty() ? 0.0 : kRankRelTol * sel.order.front().value;
    for (std::size_t s = 0; s < sel.num_selected; ++s) {
        const auto& rec = sel.order[s];
        if (rec.value <= cut) continue;  // q_s is the zero sequence
        const std::size_t block = partition.index_of_label(rec.label);
        const auto y = blocks[block].eigenvectors.col(static_cast<Eigen::Index>(rec.rank_in_block));
        const double theta = 1.0 / std::sqrt(rec.value);
        for (std::size_t c = 0; c < support.size(); ++c) {
            if (class_of[c] != block) continue;
            Complex v = 0.0;
            for (Eigen::Index k = 0; k < dense.rows(); ++k) v += std::conj(y(k)) * dense(k, static_cast<Eigen::Index>(c));
            v *= theta;
            if (v != Complex(0.0)) model.generators[s].push_back({support[c], v});
        }
    }
    return model;
}

double error_discrete(const DiscreteDataset& data, const DiscretePartition& partition, std::size_t rank,
                      double eig_tol) {
    check_partition_covers(data, partition);
    return select(decompose_blocks(data, partition, eig_tol), partition, rank).error;
}

std::size_t allocation_count(std::size_t num_labels, std::size_t rank, std::size_t max) {
    // #{alpha in N^kappa : sum alpha <= rank} = C(rank + kappa, kappa).
    long double count = 1.0L;
    for (std::size_t i = 1; i <= num_labels; ++i) {
        count = count * static_cast<long double>(rank + i) / static_cast<long double>(i);
        if (count > static_cast<long double>(max)) return max + 1;
    }
    return static_cast<std::size_t>(std::llround(count));
}

AllocationResult brute_force_optimal(const DiscreteDataset& data, const DiscretePartition& partition,
                                     std::size_t rank, double eig_tol) {
    constexpr std::size_t kGuard = 1'000'000;
    const std::size_t kappa = partition.num_labels();
    const std::size_t count = allocation_count(kappa, rank, kGuard);
    if (count > kGuard) {
        throw InputError("allocation enumeration exceeds " + std::to_string(kGuard) + " candidates (kappa=" +
                         std::to_string(kappa) + ", rank=" + std::to_string(rank) + ")");
    }
    check_partition_covers(data, partition);
    const auto blocks = decompose_blocks(data, partition, eig_tol);

    AllocationResult result;
    bool have = false;
    std::vector<std::size_t> alpha(kappa, 0);
    // Odometer over alpha in lexicographic order, pruned by sum <= rank.
    while (true) {
        double e = 0.0;
        for (std::size_t b = 0; b < kappa; ++b) {
            for (Eigen::Index s = static_cast<Eigen::Index>(alpha[b]); s < blocks[b].eigenvalues.size(); ++s) {
                e += blocks[b].eigenvalues(s);
            }
        }
        ++result.allocations_examined;
        if (!have || e < result.error) {
            have = true;
            result.error = e;
            result.minimizers.clear();
        }
        if (e == result.error) result.minimizers.push_back(alpha);

        std::size_t used = 0;
        for (const auto a : alpha) used += a;
        std::size_t pos = kappa;
        while (pos > 0) {
            --pos;
            if (used < rank) {
                ++alpha[pos];
                break;
            }
            used -= alpha[pos];
            alpha[pos] = 0;
            if (pos == 0) {
                pos = kappa;  // exhausted
                break;
            }
        }
        if (pos == kappa || kappa == 0) break;
    }
    result.allocation = result.minimizers.back();
    return result;
}

double projection_residual(const DiscreteDataset& data, const DiscreteModel& model) {
    std::set<IntPoint> positions(data.support().begin(), data.support().end());
    for (const auto& q : model.generators) {
        for (const auto& e : q) positions.insert(e.position);
    }
    const std::vector<IntPoint> index(positions.begin(), positions.end());
    auto column = [&index](const IntPoint& p) {
        return static_cast<Eigen::Index>(std::lower_bound(index.begin(), index.end(), p) - index.begin());
    };
    const auto n = static_cast<Eigen::Index>(index.size());
    ComplexMatrix a = ComplexMatrix::Zero(static_cast<Eigen::Index>(data.num_sequences()), n);
    for (std::size_t j = 0; j < data.num_sequences(); ++j) {
        for (const auto& e : data.sequence(j)) a(static_cast<Eigen::Index>(j), column(e.position)) = e.value;
    }
    ComplexMatrix q = ComplexMatrix::Zero(static_cast<Eigen::Index>(model.generators.size()), n);
    for (std::size_t s = 0; s < model.generators.size(); ++s) {
        for (const auto& e : model.generators[s]) q(static_cast<Eigen::Index>(s), column(e.position)) = e.value;
    }
    return sisapprox::projection_residual(a, q);
}

VerificationReport verify_discrete(const DiscreteDataset& data, const DiscretePartition& partition,
                                   const DiscreteModel& model) {
    VerificationReport report;

    // Orthonormality on the union of generator supports.
    std::set<IntPoint> positions;
    for (const auto& q : model.generators) {
        for (const auto& e : q) positions.insert(e.position);
    }
    const std::vector<IntPoint> index(positions.begin(), positions.end());
    ComplexMatrix rows = ComplexMatrix::Zero(static_cast<Eigen::Index>(model.generators.size()),
                                             static_cast<Eigen::Index>(index.size()));
    for (std::size_t s = 0; s < model.generators.size(); ++s) {
        for (const auto& e : model.generators[s]) {
            const auto c = std::lower_bound(index.begin(), index.end(), e.position) - index.begin();
            rows(static_cast<Eigen::Index>(s), c) = e.value;
        }
    }
    const double defect = orthonormality_defect(rows);
    report.add("parseval_orthonormality", defect <= 1e-10, "max defect " + format_double(defect));

    std::string support_issue;
    for (std::size_t s = 0; s < model.generators.size() && support_issue.empty(); ++s) {
        std::set<std::size_t> classes;
        try {
            for (const auto& e : model.generators[s]) classes.insert(partition.class_of(e.position));
        } catch (const InputError& err) {
            support_issue = "generator " + std::to_string(s) + ": " + err.what();
            break;
        }
        if (classes.size() > 1) support_issue = "generator " + std::to_string(s) + " spans several classes";
    }
    report.add("single_class_support", support_issue.empty(), support_issue);

    const double expected = error_discrete(data, partition, model.rank);
    const double actual = projection_residual(data, model);
    const double scale = std::max(1.0, data.total_energy());
    std::ostringstream msg;
    msg << "projection residual " << format_double(actual) << ", eigenvalue tail " << format_double(expected);
    report.add("residual_identity", std::abs(actual - expected) <= 1e-9 * scale, msg.str());
    return report;
}

// ---------------------------------------------------------------------- io

DiscreteDataset read_discrete_dataset(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    int dim = -1;
    std::vector<std::vector<SequenceEntry>> sequences;
    while (std::getline(in, line)) {
        ++line_no;
        if (skip_line(line)) continue;
        const auto fields = split_fields(line);
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (fields.size() < 4) throw InputError(where + ": expected j, position..., re, im");
        if (dim < 0) dim = static_cast<int>(fields.size()) - 3;
        if (static_cast<int>(fields.size()) != dim + 3) throw InputError(where + ": inconsistent column count");
        SequenceEntry entry;
        long long j = 0;
        try {
            j = std::stoll(fields[0]);
            for (int c = 0; c < dim; ++c) entry.position.push_back(std::stoll(fields[1 + static_cast<std::size_t>(c)]));
            entry.value = Complex(std::stod(fields[1 + static_cast<std::size_t>(dim)]),
                                  std::stod(fields[2 + static_cast<std::size_t>(dim)]));
        } catch (const std::exception&) {
            throw InputError(where + ": malformed row");
        }
        if (j < 0) throw InputError(where + ": negative sequence index");
        if (static_cast<std::size_t>(j) >= sequences.size()) sequences.resize(static_cast<std::size_t>(j) + 1);
        sequences[static_cast<std::size_t>(j)].push_back(std::move(entry));
    }
    if (dim < 0) throw InputError(path.string() + ": no data rows");
    return DiscreteDataset(dim, std::move(sequences));
}

void write_discrete_dataset(const DiscreteDataset& data, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "# j, position, re, im\n";
    for (std::size_t j = 0; j < data.num_sequences(); ++j) {
        for (const auto& e : data.sequence(j)) {
            out << j;
            for (const auto c : e.position) out << ", " << c;
            out << ", " << format_double(e.value.real()) << ", " << format_double(e.value.imag()) << '\n';
        }
    }
    write_text_file(path, out.str());
}

DiscretePartition parse_partition(const std::string& text, int dim) {
    std::istringstream in(text);
    std::string line;
    std::map<IntPoint, std::int64_t> labels;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        if (line.compare(first, 8, "lattice:") == 0) {
            if (!labels.empty()) throw InputError("partition mixes a lattice with explicit labels");
            const DualLattice lattice(parse_integer_matrix(line.substr(first + 8)));
            if (lattice.dim() != dim) throw InputError("partition lattice dimension does not match the data");
            return DiscretePartition::from_lattice(lattice);
        }
        const auto fields = split_fields(line);
        if (static_cast<int>(fields.size()) != dim + 1) {
            throw InputError("partition line '" + line + "' should hold " + std::to_string(dim) + " coordinates and a label");
        }
        IntPoint pos;
        std::int64_t label = 0;
        try {
            for (int c = 0; c < dim; ++c) pos.push_back(std::stoll(fields[static_cast<std::size_t>(c)]));
            label = std::stoll(fields.back());
        } catch (const std::exception&) {
            throw InputError("malformed partition line '" + line + "'");
        }
        if (!labels.emplace(pos, label).second) throw InputError("position " + point_text(pos) + " labeled twice");
    }
    return DiscretePartition::from_map(dim, std::move(labels));
}

DiscretePartition read_partition(const std::filesystem::path& path, int dim) {
    return parse_partition(read_text_file(path), dim);
}

}  // namespace sisapprox
