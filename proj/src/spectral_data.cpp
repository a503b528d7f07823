#include "sisapprox/spectral_data.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>

#include "sisapprox/error.hpp"
#include "sisapprox/keyvalue.hpp"

namespace sisapprox {

namespace {

constexpr std::size_t kMaxEntries = std::size_t{1} << 28;

std::size_t checked_power(std::size_t base, int exponent, const char* what) {
    std::size_t out = 1;
    for (int i = 0; i < exponent; ++i) {
        if (out > kMaxEntries / base) throw InputError(std::string(what) + " is too large");
        out *= base;
    }
    return out;
}

// sin(pi x), exactly zero at integers.
double sin_pi(double x) {
    const double r = x - 2.0 * std::round(0.5 * x);  // r in [-1, 1]
    if (r == 0.0 || r == 1.0 || r == -1.0) return 0.0;
    if (r == 0.5) return 1.0;
    if (r == -0.5) return -1.0;
    return std::sin(std::numbers::pi * r);
}

double sinc(double x) {
    if (x == 0.0) return 1.0;
    return sin_pi(x) / (std::numbers::pi * x);
}

std::string location(std::size_t j, std::size_t g, std::size_t k) {
    return "(j=" + std::to_string(j) + ", g=" + std::to_string(g) + ", k=" + std::to_string(k) + ")";
}

}  // namespace

SpectralGrid::SpectralGrid(int dim, int cells_per_dim, int trunc_radius)
    : dim_(dim), cells_per_dim_(cells_per_dim), trunc_radius_(trunc_radius) {
    if (dim < 1) throw InputError("grid dimension must be positive");
    if (cells_per_dim < 2 || cells_per_dim % 2 != 0) {
        throw InputError("cells_per_dim must be a positive even integer, got " + std::to_string(cells_per_dim));
    }
    if (trunc_radius < 1) {
        throw InputError("trunc_radius must be at least 1, got " + std::to_string(trunc_radius));
    }
    num_cells_ = checked_power(static_cast<std::size_t>(cells_per_dim), dim, "grid");
    const std::size_t side = 2 * static_cast<std::size_t>(trunc_radius) + 1;
    const std::size_t count = checked_power(side, dim, "translation set");
    cell_volume_ = std::pow(static_cast<double>(cells_per_dim), -dim);

    translations_.reserve(count);
    IntPoint k(static_cast<std::size_t>(dim), -trunc_radius);
    for (std::size_t n = 0; n < count; ++n) {
        translations_.push_back(k);
        for (int c = dim - 1; c >= 0; --c) {
            auto& kc = k[static_cast<std::size_t>(c)];
            if (++kc <= trunc_radius) break;
            kc = -trunc_radius;
        }
    }
}

std::vector<int> SpectralGrid::cell_coordinates(std::size_t g) const {
    std::vector<int> coords(static_cast<std::size_t>(dim_));
    for (int c = dim_ - 1; c >= 0; --c) {
        coords[static_cast<std::size_t>(c)] = static_cast<int>(g % static_cast<std::size_t>(cells_per_dim_));
        g /= static_cast<std::size_t>(cells_per_dim_);
    }
    return coords;
}

std::vector<double> SpectralGrid::cell_center(std::size_t g) const {
    const auto coords = cell_coordinates(g);
    std::vector<double> center(coords.size());
    for (std::size_t c = 0; c < coords.size(); ++c) {
        center[c] = -0.5 + (coords[c] + 0.5) / cells_per_dim_;
    }
    return center;
}

std::optional<std::size_t> SpectralGrid::translation_index(std::span<const std::int64_t> k) const {
    if (static_cast<int>(k.size()) != dim_) return std::nullopt;
    const std::int64_t side = 2 * trunc_radius_ + 1;
    std::size_t idx = 0;
    for (const std::int64_t kc : k) {
        if (kc < -trunc_radius_ || kc > trunc_radius_) return std::nullopt;
        idx = idx * static_cast<std::size_t>(side) + static_cast<std::size_t>(kc + trunc_radius_);
    }
    return idx;
}

SpectralDataset::SpectralDataset(SpectralGrid grid, std::size_t num_functions, std::vector<Complex> samples)
    : grid_(std::move(grid)), num_functions_(num_functions), samples_(std::move(samples)) {
    const std::size_t per_function = grid_.num_cells() * grid_.num_translations();
    if (num_functions_ > kMaxEntries / per_function ||
        samples_.size() != num_functions_ * per_function) {
        std::ostringstream msg;
        msg << "sample count " << samples_.size() << " does not match shape (m=" << num_functions_
            << ", cells=" << grid_.num_cells() << ", translations=" << grid_.num_translations() << ")";
        throw InputError(msg.str());
    }
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (!std::isfinite(samples_[i].real()) || !std::isfinite(samples_[i].imag())) {
            const std::size_t k = i % grid_.num_translations();
            const std::size_t g = (i / grid_.num_translations()) % grid_.num_cells();
            const std::size_t j = i / per_function;
            throw InputError("non-finite sample at " + location(j, g, k));
        }
    }
}

SpectralDataset SpectralDataset::zeros(const SpectralGrid& grid, std::size_t num_functions) {
    return SpectralDataset(grid, num_functions,
                           std::vector<Complex>(num_functions * grid.num_cells() * grid.num_translations()));
}

SpectralDataset SpectralDataset::scaled(double factor) const {
    std::vector<Complex> out(samples_);
    for (auto& z : out) z *= factor;
    return SpectralDataset(grid_, num_functions_, std::move(out));
}

ComplexVector fiber(const SpectralDataset& ds, std::size_t g, std::size_t j) {
    if (j >= ds.num_functions()) {
        throw InputError("function index " + std::to_string(j) + " out of range (m=" +
                         std::to_string(ds.num_functions()) + ")");
    }
    if (g >= ds.grid().num_cells()) {
        throw InputError("cell index " + std::to_string(g) + " out of range");
    }
    const auto view = ds.fiber_view(j, g);
    return Eigen::Map<const ComplexVector>(view.data(), static_cast<Eigen::Index>(view.size()));
}

HermitianMatrix gramian(const SpectralDataset& ds, std::size_t g, TranslationMask mask) {
    if (g >= ds.grid().num_cells()) throw InputError("cell index " + std::to_string(g) + " out of range");
    const std::size_t m = ds.num_functions();
    const std::size_t nk = ds.grid().num_translations();
    if (!mask.empty() && mask.size() != nk) throw InputError("translation mask has wrong length");
    if (m == 0 || static_cast<Eigen::Index>(m) > HermitianMatrix::kMaxOrder) {
        throw InputError("gramian needs between 1 and 256 functions");
    }
    ComplexMatrix out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        const auto fi = ds.fiber_view(i, g);
        for (std::size_t j = i; j < m; ++j) {
            const auto fj = ds.fiber_view(j, g);
            Complex sum = 0.0;
            for (std::size_t k = 0; k < nk; ++k) {
                if (!mask.empty() && mask[k] == 0) continue;
                sum += fi[k] * std::conj(fj[k]);
            }
            if (i == j) sum = sum.real();
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sum;
            out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = std::conj(sum);
        }
    }
    return HermitianMatrix(out);
}

RealVector energy_report(const SpectralDataset& ds) {
    const auto& grid = ds.grid();
    RealVector out = RealVector::Zero(static_cast<Eigen::Index>(ds.num_functions()));
    for (std::size_t j = 0; j < ds.num_functions(); ++j) {
        double total = 0.0;
        for (std::size_t g = 0; g < grid.num_cells(); ++g) {
            double cell = 0.0;
            for (const Complex& z : ds.fiber_view(j, g)) cell += std::norm(z);
            total += cell;
        }
        out(static_cast<Eigen::Index>(j)) = total * grid.cell_volume();
    }
    return out;
}

double truncation_shell_energy(const SpectralDataset& ds) {
    const auto& grid = ds.grid();
    std::vector<std::uint8_t> shell(grid.num_translations(), 0);
    for (std::size_t k = 0; k < grid.num_translations(); ++k) {
        for (const auto kc : grid.translation(k)) {
            if (kc == grid.trunc_radius() || kc == -grid.trunc_radius()) shell[k] = 1;
        }
    }
    double total = 0.0;
    for (std::size_t j = 0; j < ds.num_functions(); ++j) {
        for (std::size_t g = 0; g < grid.num_cells(); ++g) {
            const auto f = ds.fiber_view(j, g);
            for (std::size_t k = 0; k < f.size(); ++k) {
                if (shell[k]) total += std::norm(f[k]);
            }
        }
    }
    return total * grid.cell_volume();
}

// ---------------------------------------------------------------- synthesis

Family parse_family(const std::string& name) {
    if (name == "gaussian") return Family::Gaussian;
    if (name == "bspline") return Family::BSpline;
    if (name == "boxcar") return Family::Boxcar;
    throw InputError("unknown family '" + name + "' (expected gaussian, bspline or boxcar)");
}

std::string family_name(Family family) {
    switch (family) {
        case Family::Gaussian: return "gaussian";
        case Family::BSpline: return "bspline";
        case Family::Boxcar: return "boxcar";
    }
    return "unknown";
}

namespace {

void check_family_param(Family family, double param) {
    if (!std::isfinite(param)) throw InputError("family parameter must be finite");
    switch (family) {
        case Family::Gaussian:
            if (param <= 0.0) throw InputError("gaussian scale must be positive");
            break;
        case Family::Boxcar:
            if (param <= 0.0) throw InputError("boxcar half-width must be positive");
            break;
        case Family::BSpline:
            if (param < 0.0 || param != std::round(param)) {
                throw InputError("bspline order must be a non-negative integer");
            }
            break;
    }
}

}  // namespace

double evaluate_family(Family family, double param, std::span<const double> xi) {
    check_family_param(family, param);
    switch (family) {
        case Family::Gaussian: {
            double r2 = 0.0;
            for (const double x : xi) r2 += x * x;
            return std::exp(-std::numbers::pi * param * param * r2);
        }
        case Family::BSpline: {
            const int power = static_cast<int>(param) + 1;
            double out = 1.0;
            for (const double x : xi) out *= std::pow(sinc(x), power);
            return out;
        }
        case Family::Boxcar: {
            double out = 1.0;
            for (const double x : xi) {
                out *= (x == 0.0) ? 2.0 * param : sin_pi(2.0 * param * x) / (std::numbers::pi * x);
            }
            return out;
        }
    }
    return 0.0;
}

SpectralDataset synthesize(Family family, std::span<const double> params, const SpectralGrid& grid) {
    if (params.empty()) throw InputError("synthesize needs at least one parameter");
    for (const double p : params) check_family_param(family, p);
    const std::size_t nk = grid.num_translations();
    std::vector<Complex> samples(params.size() * grid.num_cells() * nk);
    std::vector<double> xi(static_cast<std::size_t>(grid.dim()));
    std::size_t pos = 0;
    for (const double p : params) {
        for (std::size_t g = 0; g < grid.num_cells(); ++g) {
            const auto center = grid.cell_center(g);
            for (std::size_t k = 0; k < nk; ++k) {
                const auto& t = grid.translation(k);
                for (std::size_t c = 0; c < xi.size(); ++c) xi[c] = center[c] + static_cast<double>(t[c]);
                samples[pos++] = evaluate_family(family, p, xi);
            }
        }
    }
    return SpectralDataset(grid, params.size(), std::move(samples));
}

SpectralDataset synthesize(const std::string& family, std::span<const double> params,
                           const SpectralGrid& grid) {
    return synthesize(parse_family(family), params, grid);
}

// ----------------------------------------------------------------- file io

PayloadFormat parse_payload_format(const std::string& name) {
    if (name == "binary-c64le") return PayloadFormat::BinaryC64LE;
    if (name == "csv") return PayloadFormat::Csv;
    throw InputError("unknown payload format '" + name + "' (expected binary-c64le or csv)");
}

std::string payload_format_name(PayloadFormat format) {
    return format == PayloadFormat::Csv ? "csv" : "binary-c64le";
}

std::string encode_c64le(std::span<const Complex> values) {
    std::string bytes(values.size() * 16, '\0');
    char* out = bytes.data();
    auto put = [&out](double x) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
        for (int b = 0; b < 8; ++b) {
            *out++ = static_cast<char>(bits & 0xffu);
            bits >>= 8;
        }
    };
    for (const Complex& z : values) {
        put(z.real());
        put(z.imag());
    }
    return bytes;
}

std::vector<Complex> decode_c64le(const std::string& bytes) {
    if (bytes.size() % 16 != 0) {
        throw InputError("binary-c64le payload length " + std::to_string(bytes.size()) +
                         " is not a multiple of 16 bytes");
    }
    std::vector<Complex> out(bytes.size() / 16);
    const auto* in = reinterpret_cast<const unsigned char*>(bytes.data());
    auto get = [&in]() {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(in[b]) << (8 * b);
        in += 8;
        return std::bit_cast<double>(bits);
    };
    for (auto& z : out) {
        const double re = get();
        const double im = get();
        z = Complex(re, im);
    }
    return out;
}

namespace {

std::vector<Complex> read_csv_payload(const std::string& text, const SpectralGrid& grid, std::size_t m,
                                      const std::string& origin) {
    const std::size_t nk = grid.num_translations();
    const std::size_t total = m * grid.num_cells() * nk;
    std::vector<Complex> samples(total);
    std::vector<std::uint8_t> seen(total, 0);
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    const std::size_t expected_cols = 4 + static_cast<std::size_t>(grid.dim());
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#' || std::isalpha(static_cast<unsigned char>(line[first]))) {
            continue;
        }
        std::vector<std::string> cols;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cols.push_back(cell);
        const std::string where = origin + ":" + std::to_string(line_no);
        if (cols.size() != expected_cols) {
            throw InputError(where + ": expected " + std::to_string(expected_cols) + " columns");
        }
        long long j = 0, g = 0;
        IntPoint k(static_cast<std::size_t>(grid.dim()));
        double re = 0.0, im = 0.0;
        try {
            j = std::stoll(cols[0]);
            g = std::stoll(cols[1]);
            for (std::size_t c = 0; c < k.size(); ++c) k[c] = std::stoll(cols[2 + c]);
            re = std::stod(cols[2 + k.size()]);
            im = std::stod(cols[3 + k.size()]);
        } catch (const std::exception&) {
            throw InputError(where + ": malformed row");
        }
        const auto kidx = grid.translation_index(k);
        if (j < 0 || static_cast<std::size_t>(j) >= m || g < 0 ||
            static_cast<std::size_t>(g) >= grid.num_cells() || !kidx) {
            throw InputError(where + ": index out of declared shape");
        }
        const std::size_t pos = (static_cast<std::size_t>(j) * grid.num_cells() + static_cast<std::size_t>(g)) * nk + *kidx;
        if (seen[pos]) throw InputError(where + ": duplicate entry");
        seen[pos] = 1;
        samples[pos] = Complex(re, im);
    }
    for (std::size_t pos = 0; pos < total; ++pos) {
        if (!seen[pos]) {
            throw InputError(origin + ": payload is missing entry " +
                             location(pos / (grid.num_cells() * nk), (pos / nk) % grid.num_cells(), pos % nk));
        }
    }
    return samples;
}

std::string write_csv_payload(const SpectralDataset& ds) {
    const auto& grid = ds.grid();
    std::ostringstream out;
    out << "j,g";
    for (int c = 0; c < grid.dim(); ++c) out << ",k" << c;
    out << ",re,im\n";
    for (std::size_t j = 0; j < ds.num_functions(); ++j) {
        for (std::size_t g = 0; g < grid.num_cells(); ++g) {
            for (std::size_t k = 0; k < grid.num_translations(); ++k) {
                out << j << ',' << g;
                for (const auto kc : grid.translation(k)) out << ',' << kc;
                const Complex z = ds.at(j, g, k);
                out << ',' << format_double(z.real()) << ',' << format_double(z.imag()) << '\n';
            }
        }
    }
    return out.str();
}

}  // namespace

SpectralDataset ingest(const std::filesystem::path& manifest) {
    const auto doc = KeyValueDocument::read(manifest);
    const long long dim = doc.get_int("dim");
    const long long m = doc.get_int("m");
    const long long cells = doc.get_int("cells_per_dim");
    const long long trunc = doc.get_int("trunc_radius");
    if (dim < 1 || dim > 8) throw InputError(manifest.string() + ": dim must be in [1, 8]");
    if (m < 1) throw InputError(manifest.string() + ": m must be positive");
    if (cells < 2 || cells % 2 != 0) {
        throw InputError(manifest.string() + ": cells_per_dim must be a positive even integer");
    }
    if (trunc < 1) throw InputError(manifest.string() + ": trunc_radius must be at least 1");
    SpectralGrid grid(static_cast<int>(dim), static_cast<int>(cells), static_cast<int>(trunc));

    std::filesystem::path payload = doc.get("payload_path");
    if (payload.is_relative()) payload = manifest.parent_path() / payload;
    const auto format = parse_payload_format(doc.get("payload_format"));
    const std::string bytes = read_text_file(payload);

    std::vector<Complex> samples;
    if (format == PayloadFormat::BinaryC64LE) {
        samples = decode_c64le(bytes);
        const std::size_t expected = static_cast<std::size_t>(m) * grid.num_cells() * grid.num_translations();
        if (samples.size() != expected) {
            throw InputError(payload.string() + ": payload holds " + std::to_string(samples.size()) +
                             " complex values, manifest declares " + std::to_string(expected));
        }
    } else {
        samples = read_csv_payload(bytes, grid, static_cast<std::size_t>(m), payload.string());
    }
    return SpectralDataset(grid, static_cast<std::size_t>(m), std::move(samples));
}

std::filesystem::path write_dataset(const SpectralDataset& ds, const std::filesystem::path& dir,
                                    const std::string& stem, PayloadFormat format) {
    const std::string payload_name = stem + (format == PayloadFormat::Csv ? ".csv" : ".c64le");
    const auto& grid = ds.grid();
    KeyValueDocument doc;
    doc.set("dim", grid.dim());
    doc.set("m", ds.num_functions());
    doc.set("cells_per_dim", grid.cells_per_dim());
    doc.set("trunc_radius", grid.trunc_radius());
    doc.set("payload_path", payload_name);
    doc.set("payload_format", payload_format_name(format));
    if (format == PayloadFormat::Csv) {
        write_text_file(dir / payload_name, write_csv_payload(ds));
    } else {
        write_text_file(dir / payload_name, encode_c64le(ds.samples()));
    }
    const auto manifest = dir / (stem + ".manifest");
    doc.write(manifest);
    return manifest;
}

}  // namespace sisapprox
