#include "btd/als.hpp"
#include "btd/error.hpp"
#include "btd/hirls.hpp"
#include "btd/metrics.hpp"
#include "btd/model.hpp"
#include "btd/synth.hpp"
#include "btd/tensor.hpp"
#include "btd/tensor_io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace py = pybind11;
using namespace btd;

namespace {

using Array3 = py::array_t<double, py::array::c_style | py::array::forcecast>;

// A C-ordered (I, J, K) array has exactly the DenseTensor3 layout.
DenseTensor3 to_tensor(const Array3& a) {
  if (a.ndim() != 3) throw UsageError("expected a 3-D array");
  const Dims3 d{a.shape(0), a.shape(1), a.shape(2)};
  std::vector<double> v(a.data(), a.data() + d.size());
  return DenseTensor3(d, std::move(v));
}

Array3 to_array(const DenseTensor3& t) {
  const auto& d = t.dims();
  Array3 a({d.I, d.J, d.K});
  std::copy(t.values().begin(), t.values().end(), a.mutable_data());
  return a;
}

BtdFactors to_factors(const py::dict& f) {
  BtdFactors out;
  out.A = f["A"].cast<std::vector<DenseMatrix>>();
  out.B = f["B"].cast<std::vector<DenseMatrix>>();
  out.C = f["C"].cast<DenseMatrix>();
  out.validate();
  return out;
}

py::dict from_factors(const BtdFactors& f) {
  py::dict d;
  d["A"] = f.A;
  d["B"] = f.B;
  d["C"] = f.C;
  d["ranks"] = f.ranks();
  return d;
}

py::dict from_ranks(const RankEstimate& e) {
  py::dict d;
  d["R"] = e.num_blocks;
  d["L"] = e.ranks;
  d["active_blocks"] = e.active_blocks;
  d["column_energies"] = e.column_energies;
  d["c_energies"] = e.c_energies;
  return d;
}

py::list from_trace(const SolverTrace& t) {
  py::list out;
  for (const auto& r : t.records) {
    py::dict d;
    d["iter"] = r.iter;
    d["objective"] = r.objective;
    d["data_fit"] = r.data_fit;
    d["reg"] = r.reg;
    d["rel_diff"] = r.rel_diff;
    d["active_R"] = r.active_r;
    d["active_L"] = r.active_l;
    d["wall_ms"] = r.wall_ms;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Block-term decomposition core (C++)";

  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("unfold", [](const Array3& t, int mode) { return unfold(to_tensor(t), mode); }, py::arg("tensor"),
        py::arg("mode"), "Mode-n unfolding (mode 1, 2 or 3).");
  m.def("fold", [](const DenseMatrix& x, int mode, std::array<Index, 3> dims) {
    return to_array(fold(x, mode, {dims[0], dims[1], dims[2]}));
  }, py::arg("matrix"), py::arg("mode"), py::arg("dims"));
  m.def("kronecker", &kronecker);
  m.def("khatri_rao_columnwise", &khatri_rao_columnwise);

  m.def("reconstruct", [](const py::dict& f) { return to_array(reconstruct(to_factors(f))); }, py::arg("factors"));
  m.def("regularizer_value", [](const py::dict& f, double eta) { return regularizer_value(to_factors(f), eta); },
        py::arg("factors"), py::arg("eta") = 1e-8);
  m.def("objective", [](const py::dict& f, const Array3& y, double lambda, double eta) {
    return objective(to_factors(f), to_tensor(y), lambda, eta);
  }, py::arg("factors"), py::arg("y"), py::arg("lam"), py::arg("eta") = 1e-8);
  m.def("count_effective_ranks", [](const py::dict& f, double block_tol, double col_tol) {
    return from_ranks(count_effective_ranks(to_factors(f), {block_tol, col_tol}));
  }, py::arg("factors"), py::arg("block_tol") = 1e-2, py::arg("col_tol") = 1e-2);
  m.def("lambda_heuristic", [](std::array<Index, 3> dims, Index r_ini, Index l_ini, double sigma_hat, double y_norm) {
    return lambda_heuristic({dims[0], dims[1], dims[2]}, r_ini, l_ini, sigma_hat, y_norm);
  }, py::arg("dims"), py::arg("r_ini"), py::arg("l_ini"), py::arg("sigma_hat"), py::arg("y_norm") = 1.0);

  m.def("gen_btd", [](std::array<Index, 3> dims, const std::vector<Index>& ranks, std::uint64_t seed) {
    const auto g = gen_btd({dims[0], dims[1], dims[2]}, ranks, seed);
    return py::make_tuple(from_factors(g.factors), to_array(g.tensor));
  }, py::arg("dims"), py::arg("ranks"), py::arg("seed"), "Returns (factors, tensor).");
  m.def("add_noise_snr", [](const Array3& x, double snr_db, std::uint64_t seed) {
    const auto n = add_noise_snr(to_tensor(x), snr_db, seed);
    return py::make_tuple(to_array(n.tensor), n.sigma);
  }, py::arg("x"), py::arg("snr_db"), py::arg("seed"), "Returns (noisy tensor, sigma).");

  m.def("run_hirls", [](const Array3& y, Index r_ini, Index l_ini, std::optional<double> lam, double sigma_hat,
                        double eta, int max_iters, double rel_tol, const std::string& prune,
                        const std::string& update_mode, const std::string& weighting, std::uint64_t seed,
                        int restarts, double lambda_scale) {
    SolverConfig cfg;
    cfg.r_ini = r_ini;
    cfg.l_ini = l_ini;
    cfg.lambda = lam;
    cfg.sigma_hat = sigma_hat;
    cfg.lambda_scale = lambda_scale;
    cfg.eta = eta;
    cfg.max_iters = max_iters;
    cfg.rel_tol = rel_tol;
    cfg.prune = parse_prune_mode(prune);
    cfg.update_mode = parse_update_mode(update_mode);
    cfg.weighting = parse_weighting(weighting);
    cfg.seed = seed;
    const DenseTensor3 t = to_tensor(y);
    SolverResult res;
    {
      py::gil_scoped_release release;
      res = restarts > 1 ? run_multistart(t, cfg, restarts) : run_hirls(t, cfg);
    }
    py::dict out;
    out["factors"] = from_factors(res.factors);
    out["ranks"] = from_ranks(res.ranks);
    out["trace"] = from_trace(res.trace);
    out["lambda"] = res.trace.lambda;
    out["converged"] = res.trace.converged;
    out["seed"] = res.seed;
    return out;
  }, py::arg("y"), py::arg("r_ini") = 10, py::arg("l_ini") = 10, py::arg("lam") = py::none(),
     py::arg("sigma_hat") = 0.0, py::arg("eta") = 1e-8, py::arg("max_iters") = 200, py::arg("rel_tol") = 1e-5,
     py::arg("prune") = "blocks", py::arg("update_mode") = "gauss_seidel", py::arg("weighting") = "plain",
     py::arg("seed") = 0, py::arg("restarts") = 1, py::arg("lambda_scale") = 1.0);

  m.def("run_als", [](const Array3& y, const std::vector<Index>& ranks, int max_iters, double rel_tol,
                      std::uint64_t seed) {
    AlsConfig cfg;
    cfg.max_iters = max_iters;
    cfg.rel_tol = rel_tol;
    cfg.seed = seed;
    const DenseTensor3 t = to_tensor(y);
    AlsResult res;
    {
      py::gil_scoped_release release;
      res = run_als(t, ranks, cfg);
    }
    py::dict out;
    out["factors"] = from_factors(res.factors);
    out["trace"] = from_trace(res.trace);
    out["converged"] = res.trace.converged;
    return out;
  }, py::arg("y"), py::arg("ranks"), py::arg("max_iters") = 200, py::arg("rel_tol") = 1e-5, py::arg("seed") = 0);

  m.def("nmse_blocks", [](const py::dict& truth, const py::dict& est) {
    const auto r = nmse_blocks(to_factors(truth), to_factors(est));
    return py::make_tuple(r.nmse, r.assignment.row_to_col);
  }, py::arg("truth"), py::arg("estimate"), "Returns (nmse, assigned estimated block per true block or -1).");
  m.def("linear_assignment", [](const DenseMatrix& cost) {
    const auto r = linear_assignment(cost);
    return py::make_tuple(r.row_to_col, r.total_cost);
  }, py::arg("cost"), "Returns (column per row or -1, total cost).");
  m.def("ssim", &ssim, py::arg("a"), py::arg("b"), py::arg("window") = 7, py::arg("dynamic_range") = 1.0);
  m.def("band_ssim_curve", [](const Array3& a, const Array3& b, int window, double range) {
    return band_ssim_curve(to_tensor(a), to_tensor(b), window, range);
  }, py::arg("a"), py::arg("b"), py::arg("window") = 7, py::arg("dynamic_range") = 1.0);

  m.def("read_tensor", [](const std::filesystem::path& p) { return to_array(read_tensor(p)); }, py::arg("path"));
  m.def("write_t3", [](const std::filesystem::path& p, const Array3& t) { write_t3(p, to_tensor(t)); },
        py::arg("path"), py::arg("tensor"));
}
