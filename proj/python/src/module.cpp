#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hhash/baselines.hpp"
#include "hhash/dataio.hpp"
#include "hhash/errors.hpp"
#include "hhash/householder.hpp"
#include "hhash/losses.hpp"
#include "hhash/retrieval.hpp"
#include "hhash/trainer.hpp"

namespace py = pybind11;
using namespace hhash;

namespace {

using LabelList = std::optional<std::vector<LabelSet>>;

EmbeddingSet make_set(const Matrix& data, LabelList labels) {
  return labels ? EmbeddingSet(data, std::move(*labels)) : EmbeddingSet(data);
}

py::array_t<std::uint8_t> packed_array(const BitCodeSet& c) {
  py::array_t<std::uint8_t> out({c.n(), c.row_bytes()});
  std::copy(c.bytes().begin(), c.bytes().end(), out.mutable_data());
  return out;
}

std::span<const std::uint8_t> as_span(const py::bytes& b) {
  const std::string_view v(b);
  return {reinterpret_cast<const std::uint8_t*>(v.data()), v.size()};
}

py::bytes to_bytes(const Bytes& b) { return {reinterpret_cast<const char*>(b.data()), b.size()}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Householder-parameterized rotations for binary hashing";

  auto base = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<NonFiniteLossError>(m, "NonFiniteLossError", base.ptr());

  py::class_<HouseholderStack>(m, "HouseholderStack")
      .def(py::init<int>(), py::arg("dim"))
      .def(py::init<Matrix>(), py::arg("vectors"))
      .def_property_readonly("dim", &HouseholderStack::dim)
      .def_property_readonly("size", &HouseholderStack::size)
      .def_property_readonly("vectors", &HouseholderStack::vectors)
      .def("__len__", &HouseholderStack::size)
      .def("__eq__", [](const HouseholderStack& a, const HouseholderStack& b) { return a == b; })
      .def("__repr__", [](const HouseholderStack& s) {
        return "HouseholderStack(dim=" + std::to_string(s.dim()) + ", size=" + std::to_string(s.size()) + ")";
      });

  m.def("reflect", [](const Vector& v, const Vector& x) { return reflect(v, x); }, py::arg("v"), py::arg("x"));
  m.def("apply_stack", &apply_stack, py::arg("stack"), py::arg("x"));
  m.def("stack_to_matrix", &stack_to_matrix, py::arg("stack"));
  m.def("decompose_orthogonal", &decompose_orthogonal, py::arg("u"), py::arg("tol") = 1e-8);
  m.def("random_stack", &random_stack, py::arg("k"), py::arg("seed"));
  m.def("orthogonality_error", &orthogonality_error, py::arg("u"));

  py::enum_<LossKind>(m, "LossKind")
      .value("L2", LossKind::L2)
      .value("L1", LossKind::L1)
      .value("MIN_ENTRY", LossKind::MIN_ENTRY)
      .value("BIT_VAR", LossKind::BIT_VAR);
  m.def("parse_loss_kind", [](const std::string& s) { return parse_loss_kind(s); }, py::arg("name"));
  m.def("normalize_rows", &normalize_rows, py::arg("data"));
  m.def("loss_value", &loss_value, py::arg("kind"), py::arg("z"));
  m.def("loss_grad", &loss_grad, py::arg("kind"), py::arg("z"));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_static("for_loss", &TrainConfig::for_loss, py::arg("kind"))
      .def_readwrite("loss", &TrainConfig::loss)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("adam_beta1", &TrainConfig::adam_beta1)
      .def_readwrite("adam_beta2", &TrainConfig::adam_beta2)
      .def_readwrite("adam_epsilon", &TrainConfig::adam_epsilon);

  py::class_<TrainReport>(m, "TrainReport")
      .def_readonly("epoch_losses", &TrainReport::epoch_losses)
      .def_readonly("initial_loss", &TrainReport::initial_loss)
      .def_readonly("final_loss", &TrainReport::final_loss)
      .def_readonly("steps", &TrainReport::steps)
      .def_property_readonly("elapsed_seconds", [](const TrainReport& r) { return r.elapsed.count(); });

  m.def(
      "fit",
      [](const Matrix& data, const TrainConfig& cfg) {
        FitResult r = [&] {
          py::gil_scoped_release release;
          return fit(EmbeddingSet(data), cfg);
        }();
        return py::make_tuple(r.stack, r.report);
      },
      py::arg("data"), py::arg("config") = TrainConfig{},
      "Returns (stack, report) for the rows of `data`.");

  py::class_<BitCodeSet>(m, "BitCodeSet")
      .def_property_readonly("n", &BitCodeSet::n)
      .def_property_readonly("k", &BitCodeSet::k)
      .def_property_readonly("packed", &packed_array)
      .def("unpack", &BitCodeSet::unpack)
      .def("__len__", &BitCodeSet::n)
      .def("__eq__", [](const BitCodeSet& a, const BitCodeSet& b) { return a == b; });

  m.def(
      "sign_binarize",
      [](const Matrix& data, const HouseholderStack* stack) { return sign_binarize(data, stack); },
      py::arg("data"), py::arg("stack") = nullptr);
  m.def(
      "hamming_distance",
      [](const BitCodeSet& c, int i, const BitCodeSet& d, int j) {
        if (c.k() != d.k()) throw DimensionError("code widths differ");
        if (i < 0 || i >= c.n() || j < 0 || j >= d.n()) throw py::index_error("row index out of range");
        return hamming_distance(c.row(i), d.row(j), c.k());
      },
      py::arg("a"), py::arg("i"), py::arg("b"), py::arg("j"));
  m.def(
      "average_precision_at_k",
      [](const std::vector<std::uint8_t>& relevance, int k_eval) {
        return average_precision_at_k(relevance, k_eval);
      },
      py::arg("relevance"), py::arg("k_eval"));
  m.def(
      "map_at_k",
      [](const Matrix& q, std::vector<LabelSet> q_labels, const BitCodeSet& q_codes, const Matrix& d,
         std::vector<LabelSet> d_labels, const BitCodeSet& d_codes, int k_eval) {
        const RetrievalResult r = map_at_k(make_set(q, std::move(q_labels)), q_codes,
                                           make_set(d, std::move(d_labels)), d_codes, k_eval);
        return py::make_tuple(r.map_at_k, r.per_query_ap);
      },
      py::arg("query"), py::arg("query_labels"), py::arg("query_codes"), py::arg("database"),
      py::arg("database_labels"), py::arg("database_codes"), py::arg("k_eval"),
      "Returns (mAP, per-query AP).");

  m.def(
      "itq_fit",
      [](const Matrix& data, int iterations, std::uint64_t seed, bool center) {
        const ItqResult r = itq_fit(EmbeddingSet(data), ItqConfig{iterations, seed, center});
        py::object mean = r.mean ? py::cast(*r.mean) : py::none();
        return py::make_tuple(r.rotation, r.to_stack(), r.objective, mean);
      },
      py::arg("data"), py::arg("iterations") = 50, py::arg("seed") = 0, py::arg("center") = false,
      "Returns (R, stack, objective per iteration, mean or None).");
  m.def("random_rotation_baseline", &random_rotation_baseline, py::arg("k"), py::arg("seed"));

  m.def("encode_emb1", [](const Matrix& x) { return to_bytes(encode_emb1(x)); });
  m.def("decode_emb1", [](const py::bytes& b) { return decode_emb1(as_span(b)); });
  m.def("encode_rot1", [](const HouseholderStack& s) { return to_bytes(encode_rot1(s)); });
  m.def("decode_rot1", [](const py::bytes& b) { return decode_rot1(as_span(b)); });
  m.def("encode_hsh1", [](const BitCodeSet& c) { return to_bytes(encode_hsh1(c)); });
  m.def("decode_hsh1", [](const py::bytes& b) { return decode_hsh1(as_span(b)); });
  m.def("read_emb1", &read_emb1);
  m.def("write_emb1", &write_emb1);
  m.def("read_rot1", &read_rot1);
  m.def("write_rot1", &write_rot1);
  m.def("read_hsh1", &read_hsh1);
  m.def("write_hsh1", &write_hsh1);
  m.def("read_labels", &read_labels);
  m.def("write_labels", &write_labels);
}
