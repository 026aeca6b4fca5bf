// umt/checkpoint.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "umt/checkpoint.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace umt {
namespace {

using nlohmann::json;

constexpr uint32_t kVersion = 1;

json hyper_to_json(const Hyper& h) {
  return json{{"sample_rate", h.sample_rate},
              {"latent_channels", h.latent_channels},
              {"pool_kernel", h.pool_kernel},
              {"enc_blocks", h.enc_blocks},
              {"enc_layers_per_block", h.enc_layers_per_block},
              {"enc_width", h.enc_width},
              {"enc_kernel", h.enc_kernel},
              {"dec_blocks", h.dec_blocks},
              {"dec_layers_per_block", h.dec_layers_per_block},
              {"dec_residual", h.dec_residual},
              {"dec_skip", h.dec_skip},
              {"cls_width", h.cls_width},
              {"cls_kernel", h.cls_kernel},
              {"n_domains", h.n_domains}};
}

Hyper hyper_from_json(const json& j) {
  Hyper h;
  h.sample_rate = j.at("sample_rate");
  h.latent_channels = j.at("latent_channels");
  h.pool_kernel = j.at("pool_kernel");
  h.enc_blocks = j.at("enc_blocks");
  h.enc_layers_per_block = j.at("enc_layers_per_block");
  h.enc_width = j.at("enc_width");
  h.enc_kernel = j.at("enc_kernel");
  h.dec_blocks = j.at("dec_blocks");
  h.dec_layers_per_block = j.at("dec_layers_per_block");
  h.dec_residual = j.at("dec_residual");
  h.dec_skip = j.at("dec_skip");
  h.cls_width = j.at("cls_width");
  h.cls_kernel = j.at("cls_kernel");
  h.n_domains = j.at("n_domains");
  return h;
}

template <typename V>
void write_pod(std::ostream& out, V v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(V));
}
template <typename V>
V read_pod(std::istream& in) {
  V v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(V));
  return v;
}

void write_mat(std::ostream& out, const Matf& m) {
  write_pod<uint64_t>(out, m.rows());
  write_pod<uint64_t>(out, m.cols());
  out.write(reinterpret_cast<const char*>(m.data()), sizeof(float) * m.size());
}

Matf read_mat(std::istream& in) {
  auto rows = read_pod<uint64_t>(in);
  auto cols = read_pod<uint64_t>(in);
  Matf m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()), sizeof(float) * m.size());
  return m;
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), s.size());
}

std::string read_string(std::istream& in) {
  auto n = read_pod<uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  return s;
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  json header = {{"format_version", kVersion},
                 {"hyper", hyper_to_json(ck.model.h)},
                 {"domains", ck.domains},
                 {"step", ck.step},
                 {"clips", ck.clips},
                 {"has_train_state", ck.has_train_state}};

  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + tmp);
    out.write("UMTC", 4);
    write_pod<uint32_t>(out, kVersion);
    write_string(out, header.dump());

    auto& model = const_cast<Model<float>&>(ck.model);
    auto params = collect_params(model);
    write_pod<uint64_t>(out, params.size());
    for (auto& p : params) {
      write_string(out, p.name);
      write_mat(out, *p.p);
    }
    write_pod<uint8_t>(out, ck.has_train_state ? 1 : 0);
    if (ck.has_train_state) {
      if (ck.opt_m.size() != params.size() || ck.opt_v.size() != params.size())
        throw std::runtime_error("checkpoint: optimizer state size mismatch");
      for (size_t i = 0; i < params.size(); i++) {
        write_pod<int64_t>(out, ck.opt_t[i]);
        write_mat(out, ck.opt_m[i]);
        write_mat(out, ck.opt_v[i]);
      }
      write_string(out, ck.rng_state);
    }
    if (!out) throw std::runtime_error("short write to checkpoint: " + tmp);
  }
  std::filesystem::rename(tmp, path);

  std::ofstream side(path + ".json");
  side << header.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "UMTC")
    throw std::runtime_error("not a checkpoint file: " + path);
  auto version = read_pod<uint32_t>(in);
  if (version != kVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  json header = json::parse(read_string(in));

  Checkpoint ck;
  ck.model = make_model<float>(hyper_from_json(header.at("hyper")));
  ck.domains = header.at("domains").get<std::vector<std::string>>();
  ck.step = header.at("step");
  ck.clips = header.at("clips");

  auto params = collect_params(ck.model);
  auto count = read_pod<uint64_t>(in);
  if (count != params.size())
    throw std::runtime_error("checkpoint tensor count mismatch");
  for (auto& p : params) {
    std::string name = read_string(in);
    if (name != p.name)
      throw std::runtime_error("checkpoint tensor order mismatch: " + name + " vs " + p.name);
    Matf m = read_mat(in);
    if (m.rows() != p.p->rows() || m.cols() != p.p->cols())
      throw std::runtime_error("checkpoint tensor shape mismatch: " + name);
    *p.p = std::move(m);
  }
  ck.has_train_state = read_pod<uint8_t>(in) != 0;
  if (ck.has_train_state) {
    for (size_t i = 0; i < params.size(); i++) {
      ck.opt_t.push_back(static_cast<long>(read_pod<int64_t>(in)));
      ck.opt_m.push_back(read_mat(in));
      ck.opt_v.push_back(read_mat(in));
    }
    ck.rng_state = read_string(in);
  }
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return ck;
}

uint64_t file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for hashing: " + path);
  uint64_t h = 0xcbf29ce484222325ull;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
    h = fnv1a(buf, static_cast<size_t>(in.gcount()), h);
  return h;
}

int domain_index(const std::vector<std::string>& domains, const std::string& name) {
  for (size_t i = 0; i < domains.size(); i++)
    if (domains[i] == name) return static_cast<int>(i);
  std::string known;
  for (const auto& d : domains) known += (known.empty() ? "" : ", ") + d;
  throw ConfigError("unknown domain '" + name + "'; registered domains: " + known);
}

}  // namespace umt
