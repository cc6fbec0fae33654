#include "mixfht/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mixfht/rng.hpp"

namespace mixfht::io {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

std::string join_csv(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out;
}

void check_id(const std::string& id, long line_no) {
  if (id.empty())
    throw IngestError("line " + std::to_string(line_no) + ": empty subject_id");
  for (char c : id) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok)
      throw IngestError("line " + std::to_string(line_no) +
                        ": subject_id may use letters, digits, '_', '-', '.'");
  }
}

struct CsvReader {
  std::ifstream in;
  std::string path;
  long line_no = 0;
  std::string manifest_digest;

  explicit CsvReader(const std::string& p) : in(p), path(p) {
    if (!in) throw IngestError("cannot open " + p);
  }

  // Next non-comment line; false at end of file.
  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line[0] == '#') {
        std::istringstream ss(line.substr(1));
        std::string key, value;
        if (ss >> key >> value && key == "manifest" && manifest_digest.empty())
          manifest_digest = value;
        continue;
      }
      if (line.empty()) continue;
      return true;
    }
    return false;
  }
};

std::ofstream open_out(const std::string& path) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write " + path);
  return out;
}

void emit_digest(std::ofstream& out, const std::string& digest) {
  if (!digest.empty()) out << "# manifest " << digest << "\n";
}

long parse_long(const std::string& s, long line_no) {
  char* end = nullptr;
  long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw IngestError("line " + std::to_string(line_no) + ": not an integer: '" +
                      s + "'");
  return v;
}

json sampler_to_json(const inference::SamplerConfig& s) {
  return json{{"n_iter", s.n_iter},
              {"burn_in", s.burn_in},
              {"thin", s.thin},
              {"adapt_interval", s.adapt_interval},
              {"target_scalar", s.target_scalar},
              {"target_vector", s.target_vector},
              {"init_scale", s.init_scale},
              {"retain_latents", s.retain_latents},
              {"trace_scales", s.trace_scales},
              {"seed", s.seed}};
}

json prior_to_json(const model::PriorHyper& p) {
  return json{{"var_alpha", p.var_alpha},
              {"var_beta", p.var_beta},
              {"ig_shape", p.ig_shape},
              {"ig_scale", p.ig_scale},
              {"xi", p.xi}};
}

json config_to_json(const RunConfig& c) {
  return json{{"model", c.model},
              {"mode", c.mode},
              {"x0", c.x0},
              {"nu", c.nu},
              {"prior", prior_to_json(c.prior)},
              {"sampler", sampler_to_json(c.sampler)},
              {"chains", c.chains},
              {"jobs", c.jobs},
              {"mc_s", c.mc_s},
              {"mc_draws", c.mc_draws},
              {"tolerance", c.tolerance},
              {"standardize", c.standardize},
              {"out_dir", c.out_dir}};
}

template <class T>
void take(json& obj, const char* key, T& into) {
  if (obj.contains(key)) {
    into = obj.at(key).get<T>();
    obj.erase(key);
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, long line_no) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw IngestError("line " + std::to_string(line_no) + ": not a number: '" +
                      s + "'");
  return v;
}

std::string variant_to_string(model::Variant v) {
  switch (v) {
    case model::Variant::cs_c_fv: return "cs-c-fv";
    case model::Variant::cs_i_fv: return "cs-i-fv";
    case model::Variant::cs_i: return "cs-i";
    case model::Variant::cs_n: return "cs-n";
  }
  throw ConfigError("unknown model variant");
}

model::Variant variant_from_string(const std::string& s) {
  if (s == "cs-c-fv") return model::Variant::cs_c_fv;
  if (s == "cs-i-fv") return model::Variant::cs_i_fv;
  if (s == "cs-i") return model::Variant::cs_i;
  if (s == "cs-n") return model::Variant::cs_n;
  throw ConfigError("unknown model '" + s +
                    "' (expected cs-c-fv, cs-i-fv, cs-i, cs-n)");
}

std::string mode_to_string(model::LikelihoodMode m) {
  return m == model::LikelihoodMode::interval_censored ? "interval" : "continuous";
}

model::LikelihoodMode mode_from_string(const std::string& s) {
  if (s == "interval") return model::LikelihoodMode::interval_censored;
  if (s == "continuous") return model::LikelihoodMode::continuous;
  throw ConfigError("unknown likelihood mode '" + s +
                    "' (expected interval or continuous)");
}

DatasetFile read_dataset(const std::string& path) {
  CsvReader r(path);
  std::string line;
  if (!r.next(line)) throw IngestError(path + ": empty file");
  auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "subject_id" ||
      header[1] != "gap_time" || header[2] != "event")
    throw IngestError("line " + std::to_string(r.line_no) +
                      ": header must start subject_id,gap_time,event");
  DatasetFile out;
  for (std::size_t j = 3; j < header.size(); ++j)
    out.covariate_names.push_back(header[j]);
  const std::size_t n_cov = out.covariate_names.size();

  model::SubjectRecord cur;
  bool open = false;
  long censored_seen = 0;
  std::vector<std::string> seen_ids;

  auto close_subject = [&](long line_no) {
    if (!open) return;
    if (censored_seen != 1 || cur.event.back() != 0)
      throw IngestError("line " + std::to_string(line_no) + ": subject " +
                        cur.id +
                        " must end with exactly one censored row (event=0)");
    out.data.push_back(std::move(cur));
    cur = model::SubjectRecord{};
    open = false;
    censored_seen = 0;
  };

  while (r.next(line)) {
    auto cells = split_csv(line);
    if (cells.size() != 3 + n_cov)
      throw IngestError("line " + std::to_string(r.line_no) + ": expected " +
                        std::to_string(3 + n_cov) + " cells, got " +
                        std::to_string(cells.size()));
    check_id(cells[0], r.line_no);
    double t = parse_double(cells[1], r.line_no);
    long ev = parse_long(cells[2], r.line_no);
    if (!(t >= 0.0) || !std::isfinite(t))
      throw IngestError("line " + std::to_string(r.line_no) +
                        ": gap_time must be a nonnegative number");
    if (ev != 0 && ev != 1)
      throw IngestError("line " + std::to_string(r.line_no) +
                        ": event must be 0 or 1");
    std::vector<double> x(1 + n_cov);
    x[0] = 1.0;
    for (std::size_t j = 0; j < n_cov; ++j)
      x[1 + j] = parse_double(cells[3 + j], r.line_no);

    if (!open || cells[0] != cur.id) {
      close_subject(r.line_no);
      for (const auto& sid : seen_ids)
        if (sid == cells[0])
          throw IngestError("line " + std::to_string(r.line_no) +
                            ": rows of subject " + cells[0] +
                            " must be contiguous");
      seen_ids.push_back(cells[0]);
      cur.id = cells[0];
      cur.x = x;
      open = true;
    } else {
      if (censored_seen > 0)
        throw IngestError("line " + std::to_string(r.line_no) + ": subject " +
                          cur.id + " has rows after its censored row");
      for (std::size_t j = 0; j < cur.x.size(); ++j)
        if (cur.x[j] != x[j])
          throw IngestError("line " + std::to_string(r.line_no) +
                            ": covariates of subject " + cur.id +
                            " change between rows");
    }
    cur.t.push_back(t);
    cur.event.push_back(int(ev));
    if (ev == 0) ++censored_seen;
  }
  close_subject(r.line_no + 1);
  if (out.data.empty()) throw IngestError(path + ": no data rows");
  out.manifest_digest = r.manifest_digest;
  return out;
}

void write_dataset(const std::string& path, const model::Dataset& data,
                   const std::vector<std::string>& covariate_names,
                   const std::string& manifest_digest) {
  auto out = open_out(path);
  emit_digest(out, manifest_digest);
  std::vector<std::string> header = {"subject_id", "gap_time", "event"};
  header.insert(header.end(), covariate_names.begin(), covariate_names.end());
  out << join_csv(header) << "\n";
  for (const auto& subj : data) {
    if (subj.x.size() != 1 + covariate_names.size())
      throw ShapeError("covariate names do not match the data width");
    for (std::size_t r = 0; r < subj.t.size(); ++r) {
      std::vector<std::string> cells = {subj.id, format_double(subj.t[r]),
                                        std::to_string(subj.event[r])};
      for (std::size_t j = 1; j < subj.x.size(); ++j)
        cells.push_back(format_double(subj.x[j]));
      out << join_csv(cells) << "\n";
    }
  }
}

DrawsFile read_draws(const std::string& path) {
  CsvReader r(path);
  std::string line;
  if (!r.next(line)) throw IngestError(path + ": empty file");
  auto header = split_csv(line);
  if (header != std::vector<std::string>{"chain", "iteration", "parameter",
                                         "value"})
    throw IngestError("line " + std::to_string(r.line_no) +
                      ": header must be chain,iteration,parameter,value");
  DrawsFile out;
  // chain id -> iteration id -> (param index -> value)
  std::map<long, std::map<long, std::vector<double>>> table;
  std::map<std::string, std::size_t> name_index;
  while (r.next(line)) {
    auto cells = split_csv(line);
    if (cells.size() != 4)
      throw IngestError("line " + std::to_string(r.line_no) +
                        ": expected 4 cells");
    long chain = parse_long(cells[0], r.line_no);
    long iter = parse_long(cells[1], r.line_no);
    double value = parse_double(cells[3], r.line_no);
    auto it = name_index.find(cells[2]);
    if (it == name_index.end()) {
      it = name_index.emplace(cells[2], out.names.size()).first;
      out.names.push_back(cells[2]);
    }
    auto& row = table[chain][iter];
    if (row.size() < out.names.size())
      row.resize(out.names.size(), std::numeric_limits<double>::quiet_NaN());
    if (!std::isnan(row[it->second]))
      throw IngestError("line " + std::to_string(r.line_no) +
                        ": duplicate value for " + cells[2]);
    row[it->second] = value;
  }
  if (table.empty()) throw IngestError(path + ": no draws");
  for (auto& [chain_id, iters] : table) {
    std::vector<std::vector<double>> chain;
    for (auto& [iter_id, row] : iters) {
      row.resize(out.names.size(), std::numeric_limits<double>::quiet_NaN());
      for (double v : row)
        if (std::isnan(v))
          throw IngestError("chain " + std::to_string(chain_id) +
                            " iteration " + std::to_string(iter_id) +
                            " is missing parameters");
      chain.push_back(std::move(row));
    }
    out.chains.push_back(std::move(chain));
  }
  out.manifest_digest = r.manifest_digest;
  return out;
}

void write_draws(const std::string& path, const std::vector<std::string>& names,
                 const std::vector<std::vector<std::vector<double>>>& chains,
                 const std::string& manifest_digest) {
  auto out = open_out(path);
  emit_digest(out, manifest_digest);
  out << "chain,iteration,parameter,value\n";
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (std::size_t d = 0; d < chains[c].size(); ++d) {
      if (chains[c][d].size() != names.size())
        throw ShapeError("draw width does not match the parameter names");
      for (std::size_t p = 0; p < names.size(); ++p) {
        out << (c + 1) << ',' << (d + 1) << ',' << names[p] << ','
            << format_double(chains[c][d][p]) << "\n";
      }
    }
  }
}

void write_summary(const std::string& path,
                   const std::vector<diagnostics::SummaryRow>& rows,
                   const std::string& manifest_digest) {
  auto out = open_out(path);
  emit_digest(out, manifest_digest);
  out << "parameter,mean,sd,hpd_lo,hpd_hi,rhat,ess,mcse,hw_pass,hw_discard\n";
  for (const auto& row : rows) {
    out << row.name << ',' << format_double(row.mean) << ','
        << format_double(row.sd) << ',' << format_double(row.hpd_lo) << ','
        << format_double(row.hpd_hi) << ',' << format_double(row.rhat) << ','
        << format_double(row.ess) << ',' << format_double(row.mcse) << ','
        << (row.hw_evaluated ? (row.hw_pass ? "1" : "0") : "NA") << ','
        << format_double(row.hw_discard) << "\n";
  }
}

void write_criteria(const std::string& path,
                    const std::vector<CriteriaRow>& rows,
                    const std::string& manifest_digest) {
  auto out = open_out(path);
  emit_digest(out, manifest_digest);
  out << "model,dic,p_d,dev_at_mean,mean_dev,lpml,mc_s,draws_used,log_zero_count\n";
  for (const auto& row : rows) {
    out << row.model << ',' << format_double(row.crit.dic) << ','
        << format_double(row.crit.p_d) << ','
        << format_double(row.crit.dev_at_mean) << ','
        << format_double(row.crit.mean_dev) << ','
        << format_double(row.crit.lpml) << ',' << row.crit.mc_S << ','
        << row.crit.draws_used << ',' << row.crit.log_zero_count << "\n";
  }
}

void write_predictive(const std::string& path,
                      const std::vector<std::pair<double, double>>& curve,
                      const std::string& manifest_digest) {
  auto out = open_out(path);
  emit_digest(out, manifest_digest);
  out << "t,F\n";
  for (const auto& [t, f] : curve)
    out << format_double(t) << ',' << format_double(f) << "\n";
}

void write_truth(const std::string& path,
                 const std::vector<simulate::TruthRow>& rows,
                 const std::string& manifest_digest) {
  auto out = open_out(path);
  emit_digest(out, manifest_digest);
  out << "id,component,z1_active,z2\n";
  for (const auto& row : rows) {
    out << row.id << ',' << (row.m + 1) << ',' << format_double(row.z1_active)
        << ',' << format_double(row.z2) << "\n";
  }
}

void write_acceptance(const std::string& path,
                      const std::vector<std::pair<int, inference::BlockStat>>& rows,
                      const std::string& manifest_digest) {
  auto out = open_out(path);
  emit_digest(out, manifest_digest);
  out << "chain,block,proposed,accepted,rate,scale\n";
  for (const auto& [chain, blk] : rows) {
    double rate = blk.proposed > 0 ? double(blk.accepted) / double(blk.proposed)
                                   : 0.0;
    out << chain << ',' << blk.name << ',' << blk.proposed << ','
        << blk.accepted << ',' << format_double(rate) << ','
        << format_double(blk.scale) << "\n";
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json obj;
  try {
    in >> obj;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  if (!obj.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig cfg;
  try {
    take(obj, "model", cfg.model);
    take(obj, "mode", cfg.mode);
    take(obj, "x0", cfg.x0);
    take(obj, "nu", cfg.nu);
    if (obj.contains("prior")) {
      json p = obj.at("prior");
      obj.erase("prior");
      take(p, "var_alpha", cfg.prior.var_alpha);
      take(p, "var_beta", cfg.prior.var_beta);
      take(p, "ig_shape", cfg.prior.ig_shape);
      take(p, "ig_scale", cfg.prior.ig_scale);
      take(p, "xi", cfg.prior.xi);
      if (!p.empty())
        throw ConfigError("unknown prior key '" + p.begin().key() + "'");
    }
    if (obj.contains("sampler")) {
      json s = obj.at("sampler");
      obj.erase("sampler");
      take(s, "n_iter", cfg.sampler.n_iter);
      take(s, "burn_in", cfg.sampler.burn_in);
      take(s, "thin", cfg.sampler.thin);
      take(s, "adapt_interval", cfg.sampler.adapt_interval);
      take(s, "target_scalar", cfg.sampler.target_scalar);
      take(s, "target_vector", cfg.sampler.target_vector);
      take(s, "init_scale", cfg.sampler.init_scale);
      take(s, "retain_latents", cfg.sampler.retain_latents);
      take(s, "trace_scales", cfg.sampler.trace_scales);
      take(s, "seed", cfg.sampler.seed);
      if (!s.empty())
        throw ConfigError("unknown sampler key '" + s.begin().key() + "'");
    }
    take(obj, "chains", cfg.chains);
    take(obj, "jobs", cfg.jobs);
    take(obj, "mc_s", cfg.mc_s);
    take(obj, "mc_draws", cfg.mc_draws);
    take(obj, "tolerance", cfg.tolerance);
    take(obj, "standardize", cfg.standardize);
    take(obj, "out_dir", cfg.out_dir);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  if (!obj.empty())
    throw ConfigError("unknown config key '" + obj.begin().key() + "'");
  return cfg;
}

std::string config_canonical(const RunConfig& cfg) {
  return config_to_json(cfg).dump();  // nlohmann sorts object keys
}

std::string config_digest(const RunConfig& cfg) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                (unsigned long long)fnv1a64(config_canonical(cfg)));
  return buf;
}

model::ModelSpec to_spec(const RunConfig& cfg) {
  model::ModelSpec spec;
  spec.variant = variant_from_string(cfg.model);
  spec.mode = mode_from_string(cfg.mode);
  spec.x0 = cfg.x0;
  spec.nu = cfg.nu;
  spec.prior = cfg.prior;
  spec.series.tolerance = cfg.tolerance;
  if (spec.variant == model::Variant::cs_n) spec.prior.xi = {1.0};
  model::validate_spec(spec);
  if (cfg.chains < 1) throw ConfigError("chains must be >= 1");
  if (cfg.jobs < 1) throw ConfigError("jobs must be >= 1");
  if (cfg.mc_s < 1) throw ConfigError("mc_s must be >= 1");
  if (cfg.mc_draws < 0) throw ConfigError("mc_draws must be >= 0");
  return spec;
}

void write_manifest(const std::string& path, const std::string& command,
                    const RunConfig& cfg,
                    const std::vector<std::string>& outputs,
                    const std::vector<std::pair<std::string, std::pair<double, double>>>&
                        standardization) {
  json m{{"tool", "mixfht"},
         {"version", "0.1.0"},
         {"command", command},
         {"seed", cfg.sampler.seed},
         {"config_digest", config_digest(cfg)},
         {"config", config_to_json(cfg)},
         {"outputs", outputs}};
  if (!standardization.empty()) {
    json s = json::object();
    for (const auto& [name, ms] : standardization)
      s[name] = json{{"mean", ms.first}, {"sd", ms.second}};
    m["standardization"] = s;
  }
  auto out = open_out(path);
  out << m.dump(2) << "\n";
}

std::string read_manifest_digest(const std::string& path) {
  CsvReader r(path);
  std::string line;
  r.next(line);
  return r.manifest_digest;
}

}  // namespace mixfht::io
