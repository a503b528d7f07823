#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "cli.hpp"
#include "sisapprox/discrete.hpp"
#include "sisapprox/error.hpp"
#include "sisapprox/extra_invariance.hpp"
#include "sisapprox/model_io.hpp"
#include "sisapprox/paley_wiener.hpp"
#include "sisapprox/sis.hpp"
#include "sisapprox/spectral_data.hpp"

namespace py = pybind11;
using namespace sisapprox;

namespace {

using ComplexArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;

SpectralDataset dataset_from_array(const SpectralGrid& grid, const ComplexArray& samples) {
    if (samples.ndim() != 3) throw InputError("samples must have shape (m, cells, translations)");
    const auto m = static_cast<std::size_t>(samples.shape(0));
    if (static_cast<std::size_t>(samples.shape(1)) != grid.num_cells() ||
        static_cast<std::size_t>(samples.shape(2)) != grid.num_translations()) {
        throw InputError("samples shape does not match the grid");
    }
    std::vector<Complex> data(samples.data(), samples.data() + samples.size());
    return SpectralDataset(grid, m, std::move(data));
}

py::array_t<Complex> dataset_to_array(const SpectralDataset& ds) {
    py::array_t<Complex> out({ds.num_functions(), ds.grid().num_cells(), ds.grid().num_translations()});
    std::copy(ds.samples().begin(), ds.samples().end(), out.mutable_data());
    return out;
}

FitOptions options(unsigned threads) {
    FitOptions o;
    o.threads = threads;
    return o;
}

}  // namespace

PYBIND11_MODULE(_sisapprox, m) {
    m.doc() = "Nearest shift-invariant subspaces from sampled Fourier data";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    // hermitian
    py::class_<EigenSystem>(m, "EigenSystem")
        .def_readonly("eigenvalues", &EigenSystem::eigenvalues)
        .def_readonly("eigenvectors", &EigenSystem::eigenvectors);
    m.def(
        "eig_hermitian",
        [](const ComplexMatrix& a, double tol) { return eig_hermitian(HermitianMatrix(a), tol); },
        py::arg("matrix"), py::arg("tol") = 1e-12);

    // lattice
    py::class_<DualLattice>(m, "DualLattice")
        .def(py::init([](const IntMatrix& basis) { return DualLattice(basis); }), py::arg("basis"))
        .def(py::init([](const std::string& text) { return DualLattice(parse_integer_matrix(text)); }),
             py::arg("text"))
        .def_property_readonly("dim", &DualLattice::dim)
        .def_property_readonly("index", &DualLattice::index)
        .def_property_readonly("basis", &DualLattice::basis)
        .def_property_readonly("hermite_form", &DualLattice::hermite_form)
        .def_property_readonly("section", &DualLattice::section)
        .def("coset_of", [](const DualLattice& l, const IntPoint& k) { return l.coset_of(k).index; });

    // spectral data
    py::class_<SpectralGrid>(m, "SpectralGrid")
        .def(py::init<int, int, int>(), py::arg("dim"), py::arg("cells_per_dim"), py::arg("trunc_radius"))
        .def_property_readonly("dim", &SpectralGrid::dim)
        .def_property_readonly("cells_per_dim", &SpectralGrid::cells_per_dim)
        .def_property_readonly("trunc_radius", &SpectralGrid::trunc_radius)
        .def_property_readonly("num_cells", &SpectralGrid::num_cells)
        .def_property_readonly("cell_volume", &SpectralGrid::cell_volume)
        .def_property_readonly("translations", &SpectralGrid::translations)
        .def("cell_center", &SpectralGrid::cell_center);

    py::class_<SpectralDataset>(m, "SpectralDataset")
        .def(py::init(&dataset_from_array), py::arg("grid"), py::arg("samples"))
        .def_property_readonly("grid", &SpectralDataset::grid)
        .def_property_readonly("num_functions", &SpectralDataset::num_functions)
        .def_property_readonly("samples", &dataset_to_array);

    m.def("synthesize",
          [](const std::string& family, const std::vector<double>& params, const SpectralGrid& grid) {
              return synthesize(family, params, grid);
          },
          py::arg("family"), py::arg("params"), py::arg("grid"));
    m.def("ingest", &ingest, py::arg("manifest"));
    m.def(
        "write_dataset",
        [](const SpectralDataset& ds, const std::filesystem::path& dir, const std::string& stem,
           const std::string& format) { return write_dataset(ds, dir, stem, parse_payload_format(format)); },
        py::arg("dataset"), py::arg("dir"), py::arg("stem") = "dataset", py::arg("format") = "binary-c64le");
    m.def(
        "gramian", [](const SpectralDataset& ds, std::size_t g) { return gramian(ds, g).entries(); },
        py::arg("dataset"), py::arg("cell"));
    m.def("energy_report", &energy_report, py::arg("dataset"));

    // sis and extra-invariance
    py::class_<FittedModel>(m, "FittedModel")
        .def_readonly("rank", &FittedModel::rank)
        .def_readonly("error", &FittedModel::error)
        .def_readonly("effective_length", &FittedModel::effective_length)
        .def_readonly("residuals", &FittedModel::residuals)
        .def_property_readonly("generators", [](const FittedModel& f) { return dataset_to_array(f.generators); });
    py::class_<ExtraInvariantModel, FittedModel>(m, "ExtraInvariantModel")
        .def_readonly("home_coset", &ExtraInvariantModel::home_coset);

    m.def(
        "fit_sis", [](const SpectralDataset& ds, std::size_t rank, unsigned threads) {
            return fit_sis(ds, rank, options(threads));
        },
        py::arg("dataset"), py::arg("rank"), py::arg("threads") = 1);
    m.def(
        "error_sis", [](const SpectralDataset& ds, std::size_t rank) { return error_sis(ds, rank); },
        py::arg("dataset"), py::arg("rank"));
    m.def(
        "fit_extra_invariant",
        [](const SpectralDataset& ds, const DualLattice& l, std::size_t rank, unsigned threads) {
            return fit_extra_invariant(ds, l, rank, options(threads));
        },
        py::arg("dataset"), py::arg("lattice"), py::arg("rank"), py::arg("threads") = 1);
    m.def(
        "error_extra",
        [](const SpectralDataset& ds, const DualLattice& l, std::size_t rank) { return error_extra(ds, l, rank); },
        py::arg("dataset"), py::arg("lattice"), py::arg("rank"));
    m.def(
        "project_residuals",
        [](const FittedModel& model, const SpectralDataset& ds) { return project_onto(model, ds).residuals; },
        py::arg("model"), py::arg("dataset"));
    m.def(
        "verify_extra_invariance",
        [](const ExtraInvariantModel& model) { return verify_extra_invariance(model, model.lattice).passed(); },
        py::arg("model"));

    // paley-wiener
    py::class_<MultiTileModel>(m, "MultiTileModel")
        .def_readonly("rank", &MultiTileModel::rank)
        .def_readonly("box_radius", &MultiTileModel::box_radius)
        .def_readonly("chosen", &MultiTileModel::chosen)
        .def_readonly("error", &MultiTileModel::error)
        .def_readonly("out_of_box_energy", &MultiTileModel::out_of_box_energy)
        .def_property_readonly("total_error", &MultiTileModel::total_error);
    m.def(
        "fit_multitile",
        [](const SpectralDataset& ds, std::size_t rank, int box, unsigned threads) {
            return fit_multitile(ds, rank, box, options(threads));
        },
        py::arg("dataset"), py::arg("rank"), py::arg("box"), py::arg("threads") = 1);
    m.def(
        "verify_multitile", [](const MultiTileModel& model) { return verify_multitile(model).passed(); },
        py::arg("model"));

    // discrete
    py::class_<DiscreteDataset>(m, "DiscreteDataset")
        .def(py::init([](int dim, const std::vector<std::vector<std::pair<IntPoint, Complex>>>& seqs) {
                 std::vector<std::vector<SequenceEntry>> out(seqs.size());
                 for (std::size_t j = 0; j < seqs.size(); ++j) {
                     for (const auto& [pos, value] : seqs[j]) out[j].push_back({pos, value});
                 }
                 return DiscreteDataset(dim, std::move(out));
             }),
             py::arg("dim"), py::arg("sequences"))
        .def_property_readonly("dim", &DiscreteDataset::dim)
        .def_property_readonly("support", &DiscreteDataset::support)
        .def("total_energy", &DiscreteDataset::total_energy);
    py::class_<DiscretePartition>(m, "DiscretePartition")
        .def_static("from_lattice", &DiscretePartition::from_lattice, py::arg("lattice"))
        .def_static("from_map", &DiscretePartition::from_map, py::arg("dim"), py::arg("labels"))
        .def_property_readonly("labels", &DiscretePartition::labels);
    py::class_<DiscreteModel>(m, "DiscreteModel")
        .def_readonly("rank", &DiscreteModel::rank)
        .def_readonly("error", &DiscreteModel::error)
        .def_readonly("num_selected", &DiscreteModel::num_selected)
        .def_property_readonly("generators", [](const DiscreteModel& model) {
            std::vector<std::vector<std::pair<IntPoint, Complex>>> out(model.generators.size());
            for (std::size_t s = 0; s < out.size(); ++s) {
                for (const auto& e : model.generators[s]) out[s].emplace_back(e.position, e.value);
            }
            return out;
        });
    py::class_<AllocationResult>(m, "AllocationResult")
        .def_readonly("error", &AllocationResult::error)
        .def_readonly("allocation", &AllocationResult::allocation)
        .def_readonly("minimizers", &AllocationResult::minimizers);
    m.def(
        "fit_discrete",
        [](const DiscreteDataset& a, const DiscretePartition& p, std::size_t rank) { return fit_discrete(a, p, rank); },
        py::arg("data"), py::arg("partition"), py::arg("rank"));
    m.def(
        "error_discrete",
        [](const DiscreteDataset& a, const DiscretePartition& p, std::size_t rank) {
            return error_discrete(a, p, rank);
        },
        py::arg("data"), py::arg("partition"), py::arg("rank"));
    m.def(
        "brute_force_optimal",
        [](const DiscreteDataset& a, const DiscretePartition& p, std::size_t rank) {
            return brute_force_optimal(a, p, rank);
        },
        py::arg("data"), py::arg("partition"), py::arg("rank"));

    // command line
    m.def(
        "run_cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "sisapprox");
            std::vector<const char*> argv;
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out;
            std::ostringstream err;
            const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs one command line; returns (exit code, stdout, stderr).");
}
