// Copyright 2026 The guidergen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <memory>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gsg/corpus.h"
#include "gsg/eval.h"
#include "gsg/grammar.h"
#include "gsg/model.h"
#include "gsg/rewards.h"
#include "gsg/trainer.h"

namespace py = pybind11;

namespace gsg {
namespace {

using Vectors = std::vector<std::vector<double>>;

std::vector<Tensor> to_tensors(const Vectors& v) {
  std::vector<Tensor> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(Tensor::Vector(x));
  return out;
}

py::dict report_dict(const BleuReport& r) {
  py::dict d;
  d["scores"] = r.scores;
  d["precisions"] = r.precisions;
  d["brevity_penalty"] = r.brevity_penalty;
  d["hypotheses"] = r.hypotheses;
  d["references"] = r.references;
  return d;
}

BleuOptions options(std::size_t max_n, bool smoothing) {
  BleuOptions o;
  o.max_n = max_n;
  o.smoothing = smoothing;
  return o;
}

RewardConfig reward_config(std::size_t lookahead, double gamma,
                           const std::string& mode, bool clamp) {
  RewardConfig c;
  c.lookahead = lookahead;
  c.gamma = gamma;
  c.mode = parse_reward_mode(mode);
  c.clamp = clamp;
  c.validate();
  return c;
}

// Owns a Session plus whatever corpus it was last trained on.
class PySession {
 public:
  static PySession create(const std::vector<std::string>& lines,
                          const std::string& config) {
    const TrainConfig cfg = TrainConfig::parse(config);
    PySession p;
    p.s_ = make_session(Vocab::build(lines, cfg.min_count), cfg);
    return p;
  }
  static PySession load(const std::string& path) {
    PySession p;
    p.s_ = load_checkpoint(path);
    return p;
  }

  void save(const std::string& path) const { save_checkpoint(*s_, path); }

  std::string pretrain(const std::vector<std::string>& lines,
                       std::size_t epochs) {
    return gsg::pretrain(*s_, corpus(lines), epochs).csv();
  }
  std::string train_gmgan(const std::vector<std::string>& lines,
                          std::size_t steps) {
    return gsg::train_gmgan(*s_, corpus(lines), steps).csv();
  }
  std::string pretrain_conditional(
      const std::vector<std::pair<std::string, std::string>>& pairs,
      std::size_t epochs) {
    return gsg::pretrain_conditional(*s_, paired(pairs), epochs).csv();
  }
  std::string train_gmst(
      const std::vector<std::pair<std::string, std::string>>& pairs,
      std::size_t steps) {
    return gsg::train_gmst(*s_, paired(pairs), steps).csv();
  }

  std::vector<std::string> generate(std::size_t num, std::uint64_t seed,
                                    double temperature) const {
    Rng seeds(mix_seed(seed));
    std::vector<std::string> out;
    for (const SampleOutput& o :
         sample_from_noise(s_->model.policy(), num, seeds, temperature)) {
      out.push_back(decode(o.ids, s_->model.vocab));
    }
    return out;
  }

  std::string greedy(const std::string& source) const {
    const Model& m = s_->model;
    const Tensor z =
        m.encoder.encode_prefix(encode(source, m.vocab, s_->config.model.max_len));
    return decode(greedy_decode(m.policy(), z).ids, m.vocab);
  }

  // Features f_0 .. f_n of the encoded sentence (EOS appended).
  Vectors features(const std::string& sentence) const {
    Vectors out;
    for (const Tensor& f : s_->model.encoder.prefix_features(ids(sentence))) {
      out.push_back(f.data);
    }
    return out;
  }

  // Guider predictions p_0 .. p_{n-1} from a seeded noise state.
  Vectors predictions(const std::string& sentence, std::uint64_t seed) const {
    const Model& m = s_->model;
    const Sentence x = ids(sentence);
    const std::vector<Tensor> f = m.encoder.prefix_features(x);
    Rng rng(mix_seed(seed));
    const Tensor z = noise_state(m.encoder.feature_dim(), rng);
    Vectors out;
    for (const Tensor& p :
         m.guider.predictions(z, std::span<const Tensor>(f).first(x.size()))) {
      out.push_back(p.data);
    }
    return out;
  }

  double perplexity(const std::vector<std::string>& lines,
                    std::uint64_t seed) const {
    Rng rng(seed);
    return gsg::perplexity(s_->model.policy(), corpus(lines).sentences,
                           InitMode::kNoise, rng);
  }

  std::vector<std::string> vocab() const { return s_->model.vocab.tokens(); }
  std::string config() const { return s_->config.to_text(); }
  std::size_t lookahead() const { return s_->model.lookahead; }

 private:
  Sentence ids(const std::string& sentence) const {
    if (split_tokens(sentence).empty()) throw ConfigError("empty sentence");
    return encode(sentence, s_->model.vocab, s_->config.model.max_len);
  }
  Corpus corpus(const std::vector<std::string>& lines) const {
    return make_corpus(lines, s_->model.vocab, s_->config.model.max_len);
  }
  PairedCorpus paired(
      const std::vector<std::pair<std::string, std::string>>& pairs) const {
    return make_paired_corpus(pairs, s_->model.vocab, s_->config.model.max_len);
  }

  std::shared_ptr<Session> s_;
};

std::vector<Tokens> intern_all(TokenInterner& intern,
                               const std::vector<std::string>& lines) {
  std::vector<Tokens> out;
  for (const std::string& l : lines) out.push_back(intern(l));
  return out;
}

}  // namespace
}  // namespace gsg

PYBIND11_MODULE(_gsg, m) {
  using namespace gsg;
  m.doc() = "Guided sequence generation core.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("sample_grammar",
        [](const std::string& path, std::size_t n, std::uint64_t seed,
           std::size_t max_len) {
          return sample_grammar(Grammar::load_file(path, seed), n, max_len);
        },
        py::arg("path"), py::arg("n"), py::arg("seed") = 0,
        py::arg("max_len") = 15);

  m.def("bleu",
        [](const std::vector<std::string>& hyps,
           const std::vector<std::string>& refs, std::size_t max_n,
           bool smoothing) {
          TokenInterner intern;
          return report_dict(bleu_shared(intern_all(intern, hyps),
                                         intern_all(intern, refs),
                                         options(max_n, smoothing)));
        },
        py::arg("hyps"), py::arg("refs"), py::arg("max_n") = 4,
        py::arg("smoothing") = false,
        "Corpus BLEU of each hypothesis against the shared reference set.");
  m.def("bleu_multi",
        [](const std::vector<std::string>& hyps,
           const std::vector<std::vector<std::string>>& refs,
           std::size_t max_n, bool smoothing) {
          TokenInterner intern;
          std::vector<std::vector<Tokens>> r;
          for (const auto& set : refs) r.push_back(intern_all(intern, set));
          return report_dict(
              bleu(intern_all(intern, hyps), r, options(max_n, smoothing)));
        },
        py::arg("hyps"), py::arg("refs"), py::arg("max_n") = 4,
        py::arg("smoothing") = false,
        "Corpus BLEU where refs[i] are the references of hyps[i].");
  m.def("self_bleu",
        [](const std::vector<std::string>& hyps, std::size_t max_n,
           bool smoothing) {
          TokenInterner intern;
          return report_dict(
              self_bleu(intern_all(intern, hyps), options(max_n, smoothing)));
        },
        py::arg("hyps"), py::arg("max_n") = 4, py::arg("smoothing") = false);

  m.def("feature_matching_rewards",
        [](const Vectors& features, const Vectors& predictions,
           std::size_t lookahead) {
          return feature_matching_rewards(to_tensors(features),
                                          to_tensors(predictions), lookahead);
        },
        py::arg("features"), py::arg("predictions"), py::arg("lookahead"));
  m.def("cumulative_rewards",
        [](const std::vector<double>& rg, double gamma, bool relative) {
          return cumulative_rewards(rg, gamma, relative);
        },
        py::arg("rg"), py::arg("gamma"), py::arg("relative") = false);
  m.def("q_unconditional",
        [](const std::vector<double>& rg, double final, double gamma,
           const std::string& mode, std::size_t lookahead) {
          return q_unconditional(rg, final,
                                 reward_config(lookahead, gamma, mode, true));
        },
        py::arg("rg"), py::arg("final"), py::arg("gamma") = 0.95,
        py::arg("mode") = "both", py::arg("lookahead") = 4);
  m.def("q_conditional",
        [](const std::vector<double>& rg, double rs, double gamma,
           const std::string& mode, bool clamp, std::size_t lookahead) {
          return q_conditional(rg, rs,
                               reward_config(lookahead, gamma, mode, clamp));
        },
        py::arg("rg"), py::arg("rs"), py::arg("gamma") = 0.95,
        py::arg("mode") = "both", py::arg("clamp") = true,
        py::arg("lookahead") = 4);

  m.def("default_config", []() { return TrainConfig{}.to_text(); });
  m.def("parse_config",
        [](const std::string& text) { return TrainConfig::parse(text).to_text(); },
        py::arg("text"), "Validated, normalized config text.");

  py::class_<PySession>(m, "Session")
      .def_static("create", &PySession::create, py::arg("lines"),
                  py::arg("config") = "")
      .def_static("load", &PySession::load, py::arg("path"))
      .def("save", &PySession::save, py::arg("path"))
      .def("pretrain", &PySession::pretrain, py::arg("lines"), py::arg("epochs"),
           py::call_guard<py::gil_scoped_release>())
      .def("pretrain_conditional", &PySession::pretrain_conditional,
           py::arg("pairs"), py::arg("epochs"),
           py::call_guard<py::gil_scoped_release>())
      .def("train_gmgan", &PySession::train_gmgan, py::arg("lines"),
           py::arg("steps"), py::call_guard<py::gil_scoped_release>())
      .def("train_gmst", &PySession::train_gmst, py::arg("pairs"),
           py::arg("steps"), py::call_guard<py::gil_scoped_release>())
      .def("generate", &PySession::generate, py::arg("num"), py::arg("seed") = 0,
           py::arg("temperature") = 1.0)
      .def("greedy", &PySession::greedy, py::arg("source"))
      .def("features", &PySession::features, py::arg("sentence"))
      .def("predictions", &PySession::predictions, py::arg("sentence"),
           py::arg("seed") = 0)
      .def("perplexity", &PySession::perplexity, py::arg("lines"),
           py::arg("seed") = 0)
      .def_property_readonly("vocab", &PySession::vocab)
      .def_property_readonly("config", &PySession::config)
      .def_property_readonly("lookahead", &PySession::lookahead);
}
