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

#include "gsg/model.h"

#include <bit>
#include <fstream>
#include <map>
#include <sstream>

namespace gsg {
namespace {

enum class Stream : std::uint64_t {
  kEncoder = 1,
  kGuider,
  kGenerator,
  kDiscriminator,
};

Rng init_rng(std::uint64_t seed, Stream s) {
  return Rng(mix_seed(seed * 8 + static_cast<std::uint64_t>(s)));
}

}  // namespace

Model::Model(const Vocab& v, const TrainConfig& c)
    : vocab(v), config(c.model), lookahead(c.reward.lookahead) {
  c.validate();
  Rng enc_rng = init_rng(c.seed, Stream::kEncoder);
  Rng gui_rng = init_rng(c.seed, Stream::kGuider);
  Rng gen_rng = init_rng(c.seed, Stream::kGenerator);
  Rng dis_rng = init_rng(c.seed, Stream::kDiscriminator);
  const std::size_t nv = vocab.size();
  encoder = CnnEncoder(nv, config.d_emb, config.filters, config.windows, enc_rng);
  const std::size_t df = encoder.feature_dim();
  guider = GuiderNet(df, config.guider_hidden, 0, gui_rng);
  generator = GeneratorNet(nv, config.d_emb, config.hidden, df, gen_rng);
  discriminator = Discriminator(nv, config.disc_d_emb, config.disc_filters,
                                config.windows, config.max_len, dis_rng);
}

Policy Model::policy() const {
  return Policy{encoder, guider, generator, config.max_len};
}

ParameterList Model::encoder_params() {
  ParameterList p;
  encoder.collect(p);
  return p;
}
ParameterList Model::generator_params() {
  ParameterList p;
  generator.collect(p);
  return p;
}
ParameterList Model::guider_params() {
  ParameterList p;
  guider.collect(p);
  return p;
}
ParameterList Model::discriminator_params() {
  ParameterList p;
  discriminator.collect(p);
  return p;
}
ParameterList Model::all_params() {
  ParameterList p;
  encoder.collect(p);
  guider.collect(p);
  generator.collect(p);
  discriminator.collect(p);
  return p;
}

Session::Session(const Vocab& vocab, const TrainConfig& c)
    : config(c),
      model(vocab, c),
      encoder_opt(model.encoder_params(), {.lr = c.lr_encoder}),
      generator_opt(model.generator_params(), {.lr = c.lr_generator}),
      guider_opt(model.guider_params(), {.lr = c.lr_guider}),
      disc_opt(model.discriminator_params(), {.lr = c.lr_disc}),
      rl_opt(model.generator_params(), {.lr = c.rl_lr_generator}),
      rng(mix_seed(c.seed)) {}

std::unique_ptr<Session> make_session(const Vocab& vocab,
                                      const TrainConfig& config) {
  return std::make_unique<Session>(vocab, config);
}

// ---------------------------------------------------------------------------
// Checkpoint I/O.

namespace {

constexpr char kMagic[4] = {'G', 'S', 'G', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  std::uint64_t bytes(int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      const int ch = in_.get();
      if (ch == EOF) throw FormatError("checkpoint truncated");
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(ch)) << (8 * i);
    }
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(bytes(4)); }
  std::uint64_t u64() { return bytes(8); }
  std::string str(std::size_t limit = std::size_t{1} << 30) {
    const std::size_t n = u32();
    if (n > limit) throw FormatError("checkpoint string too long");
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    if (!in_) throw FormatError("checkpoint truncated");
    return s;
  }

 private:
  std::istream& in_;
};

struct NamedTensors {
  std::vector<std::pair<std::string, const Tensor*>> out;
  void add(const std::string& name, const Tensor& t) { out.emplace_back(name, &t); }
};

void add_optimizer(NamedTensors& nt, const std::string& tag, const Adam& opt) {
  for (std::size_t i = 0; i < opt.params().size(); ++i) {
    const std::string& pname = opt.params()[i]->name;
    nt.add("opt." + tag + ".m." + pname, opt.first_moments()[i]);
    nt.add("opt." + tag + ".v." + pname, opt.second_moments()[i]);
  }
}

std::vector<std::pair<std::string, Adam*>> optimizers(Session& s) {
  return {{"encoder", &s.encoder_opt},
          {"generator", &s.generator_opt},
          {"guider", &s.guider_opt},
          {"disc", &s.disc_opt},
          {"rl", &s.rl_opt}};
}

std::string meta_text(const Session& s) {
  std::ostringstream m;
  m << "pretrain_epochs_done = " << s.pretrain_epochs_done << '\n'
    << "rl_step = " << s.rl_step << '\n';
  auto& mut = const_cast<Session&>(s);
  for (auto& [tag, opt] : optimizers(mut)) {
    m << "opt." << tag << ".steps = " << opt->steps() << '\n';
  }
  return m.str();
}

}  // namespace

void save_checkpoint(const Session& session, const std::string& path) {
  Session& s = const_cast<Session&>(session);
  NamedTensors nt;
  for (Parameter* p : s.model.all_params()) nt.add(p->name, p->value);
  for (auto& [tag, opt] : optimizers(s)) add_optimizer(nt, tag, *opt);

  std::ostringstream vocab;
  s.model.vocab.save(vocab);
  const std::vector<std::pair<std::string, std::string>> blobs = {
      {"config", s.config.to_text()},
      {"rng", s.rng.state()},
      {"vocab", vocab.str()},
      {"meta", meta_text(s)}};

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write checkpoint: " + path);
    out.write(kMagic, 4);
    put_u32(out, kCheckpointVersion);
    put_u32(out, static_cast<std::uint32_t>(nt.out.size()));
    for (const auto& [name, t] : nt.out) {
      put_string(out, name);
      put_u32(out, static_cast<std::uint32_t>(t->rank()));
      for (std::size_t d : t->shape) put_u64(out, d);
      for (double v : t->data) put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
    put_u32(out, static_cast<std::uint32_t>(blobs.size()));
    for (const auto& [name, text] : blobs) {
      put_string(out, name);
      put_string(out, text);
    }
    if (!out) throw ConfigError("failed writing checkpoint: " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw ConfigError("cannot move checkpoint into place: " + path);
  }
}

std::unique_ptr<Session> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint: " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != std::string(kMagic, 4)) {
    throw FormatError(path + " is not a checkpoint");
  }
  Reader r(in);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " +
                      std::to_string(version) + " (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  std::map<std::string, Tensor> tensors;
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str(4096);
    const std::uint32_t rank = r.u32();
    if (rank > 8) throw FormatError("tensor " + name + " has rank " + std::to_string(rank));
    Shape shape(rank);
    std::size_t n = 1;
    for (auto& d : shape) {
      d = r.u64();
      if (d > (std::size_t{1} << 32)) throw FormatError("tensor too large");
      n *= d;
    }
    if (n > (std::size_t{1} << 28)) throw FormatError("tensor too large");
    Tensor t(shape);
    for (double& v : t.data) v = std::bit_cast<double>(r.u64());
    tensors.emplace(std::move(name), std::move(t));
  }
  std::map<std::string, std::string> blobs;
  const std::uint32_t nblobs = r.u32();
  for (std::uint32_t i = 0; i < nblobs; ++i) {
    std::string name = r.str(4096);
    blobs[name] = r.str();
  }
  for (const char* key : {"config", "rng", "vocab", "meta"}) {
    if (!blobs.contains(key)) {
      throw FormatError(std::string("checkpoint lacks the ") + key + " blob");
    }
  }
  TrainConfig config = TrainConfig::parse(blobs["config"]);
  std::istringstream vin(blobs["vocab"]);
  Vocab vocab = Vocab::load(vin);
  auto session = make_session(vocab, config);

  auto take = [&](const std::string& name, Tensor& into) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw FormatError("checkpoint lacks tensor " + name);
    if (it->second.shape != into.shape) {
      throw FormatError("tensor " + name + " has shape " +
                        shape_string(it->second.shape) + ", expected " +
                        shape_string(into.shape));
    }
    into = std::move(it->second);
    tensors.erase(it);
  };
  for (Parameter* p : session->model.all_params()) take(p->name, p->value);
  for (auto& [tag, opt] : optimizers(*session)) {
    for (std::size_t i = 0; i < opt->params().size(); ++i) {
      const std::string& pname = opt->params()[i]->name;
      take("opt." + tag + ".m." + pname, opt->first_moments()[i]);
      take("opt." + tag + ".v." + pname, opt->second_moments()[i]);
    }
  }
  if (!tensors.empty()) {
    throw FormatError("checkpoint has unexpected tensor " + tensors.begin()->first);
  }
  session->rng.set_state(blobs["rng"]);

  std::map<std::string, std::int64_t> meta;
  std::istringstream min(blobs["meta"]);
  std::string line;
  while (std::getline(min, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    meta[line.substr(0, eq)] = std::stoll(line.substr(eq + 3));
  }
  session->pretrain_epochs_done = meta["pretrain_epochs_done"];
  session->rl_step = meta["rl_step"];
  for (auto& [tag, opt] : optimizers(*session)) {
    opt->set_steps(meta["opt." + tag + ".steps"]);
  }
  return session;
}

}  // namespace gsg
