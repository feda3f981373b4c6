#include "granger/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace granger {

namespace {

std::string trimmed(const std::string& s) {
  const auto from = s.find_first_not_of(" \t\r\n");
  if (from == std::string::npos) return {};
  const auto to = s.find_last_not_of(" \t\r\n");
  return s.substr(from, to - from + 1);
}

[[noreturn]] void parse_fail(const std::string& path, int line,
                             const std::string& what) {
  std::ostringstream msg;
  msg << path << ":" << line << ": " << what;
  throw std::runtime_error(msg.str());
}

bool parse_double(const std::string& token, double& out) {
  std::size_t consumed = 0;
  try {
    out = std::stod(token, &consumed);
  } catch (const std::exception&) {
    return false;
  }
  return consumed == token.size();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  return out;
}

}  // namespace

std::pair<Eigen::VectorXd, Eigen::VectorXd> ingest_pair(const std::string& path,
                                                        bool zero_mean) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  std::vector<double> col_x, col_y;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trimmed(line);
    if (body.empty()) continue;
    std::istringstream ss(body);
    std::vector<std::string> tokens;
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    if (tokens.size() != 2) {
      std::ostringstream what;
      what << "expected 2 columns, found " << tokens.size();
      parse_fail(path, line_no, what.str());
    }
    double vx = 0.0, vy = 0.0;
    if (!parse_double(tokens[0], vx)) {
      parse_fail(path, line_no, "non-numeric token '" + tokens[0] + "'");
    }
    if (!parse_double(tokens[1], vy)) {
      parse_fail(path, line_no, "non-numeric token '" + tokens[1] + "'");
    }
    col_x.push_back(vx);
    col_y.push_back(vy);
  }
  if (col_x.empty()) {
    throw std::runtime_error(path + ": no data rows");
  }
  Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(col_x.data(), col_x.size());
  Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(col_y.data(), col_y.size());
  if (zero_mean) {
    x.array() -= x.mean();
    y.array() -= y.mean();
  }
  return {std::move(x), std::move(y)};
}

void emit(const RocCurve& curve, const std::string& path, EmitFormat format) {
  auto out = open_for_write(path);
  const auto& m = curve.meta;
  if (format == EmitFormat::kCsv) {
    out << "# n=" << m.n_window << " order=" << m.order
        << " snr_db=" << format_double(m.snr_db) << " trials=" << m.trials
        << " seed=" << m.master_seed << " sigma=" << to_string(m.sigma_mode)
        << " field=" << to_string(m.field) << " dof=" << m.dof << "\n";
    out << "lambda,p_fa_emp,p_d_emp,p_fa_theory,p_d_theory\n";
    for (const auto& p : curve.points) {
      out << format_double(p.lambda) << ',' << format_double(p.p_fa_emp) << ','
          << format_double(p.p_d_emp) << ',' << format_double(p.p_fa_theory)
          << ',' << format_double(p.p_d_theory) << "\n";
    }
  } else {
    nlohmann::ordered_json meta;
    meta["type"] = "roc_meta";
    meta["n"] = m.n_window;
    meta["order"] = m.order;
    meta["snr_db"] = m.snr_db;
    meta["trials"] = m.trials;
    meta["seed"] = m.master_seed;
    meta["sigma"] = to_string(m.sigma_mode);
    meta["field"] = to_string(m.field);
    meta["dof"] = m.dof;
    out << meta.dump() << "\n";
    for (const auto& p : curve.points) {
      nlohmann::ordered_json row;
      row["lambda"] = p.lambda;
      row["p_fa_emp"] = p.p_fa_emp;
      row["p_d_emp"] = p.p_d_emp;
      row["p_fa_theory"] = p.p_fa_theory;
      row["p_d_theory"] = p.p_d_theory;
      out << row.dump() << "\n";
    }
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

void emit(const WindowedResult& result, const std::string& path,
          EmitFormat format) {
  auto out = open_for_write(path);
  if (format == EmitFormat::kCsv) {
    out << "# n=" << result.n_window << " order=" << result.order
        << " snr_db=" << format_double(result.snr_db)
        << " n_windows=" << result.n_windows << " trials=" << result.trials
        << " seed=" << result.master_seed << "\n";
    out << "lambda,p_fa,p_d\n";
    for (const auto& p : result.points) {
      out << format_double(p.lambda) << ',' << format_double(p.p_fa) << ','
          << format_double(p.p_d) << "\n";
    }
  } else {
    nlohmann::ordered_json meta;
    meta["type"] = "windowed_meta";
    meta["n"] = result.n_window;
    meta["order"] = result.order;
    meta["snr_db"] = result.snr_db;
    meta["n_windows"] = result.n_windows;
    meta["trials"] = result.trials;
    meta["seed"] = result.master_seed;
    out << meta.dump() << "\n";
    for (const auto& p : result.points) {
      nlohmann::ordered_json row;
      row["lambda"] = p.lambda;
      row["p_fa"] = p.p_fa;
      row["p_d"] = p.p_d;
      out << row.dump() << "\n";
    }
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

RocCurve read_roc_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  RocCurve curve;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trimmed(line);
    if (body.empty()) continue;
    if (body[0] == '#') {
      std::istringstream ss(body.substr(1));
      std::string kv;
      while (ss >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        auto& m = curve.meta;
        if (key == "n") m.n_window = std::stoi(value);
        else if (key == "order") m.order = std::stoi(value);
        else if (key == "snr_db") m.snr_db = std::stod(value);
        else if (key == "trials") m.trials = std::stoi(value);
        else if (key == "seed") m.master_seed = std::stoull(value);
        else if (key == "sigma")
          m.sigma_mode = value == "oracle" ? SigmaMode::kOracle : SigmaMode::kPlugin;
        else if (key == "field")
          m.field = value == "complex" ? Field::kComplex : Field::kReal;
        else if (key == "dof") m.dof = std::stoi(value);
      }
      continue;
    }
    if (body.rfind("lambda", 0) == 0) continue;  // header
    std::istringstream ss(body);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      if (!parse_double(trimmed(cell), v)) {
        parse_fail(path, line_no, "non-numeric cell '" + cell + "'");
      }
      vals.push_back(v);
    }
    if (vals.size() != 5) parse_fail(path, line_no, "expected 5 columns");
    curve.points.push_back({vals[0], vals[1], vals[2], vals[3], vals[4]});
  }
  return curve;
}

ModelSpec parse_model_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");

  std::map<std::string, std::pair<std::string, int>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string body = trimmed(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      parse_fail(path, line_no, "expected 'key = value'");
    }
    const std::string key = trimmed(body.substr(0, eq));
    const std::string value = trimmed(body.substr(eq + 1));
    if (key.empty() || value.empty()) {
      parse_fail(path, line_no, "expected 'key = value'");
    }
    if (entries.count(key)) parse_fail(path, line_no, "duplicate key " + key);
    entries[key] = {value, line_no};
  }

  auto take = [&](const std::string& key) -> std::optional<std::pair<std::string, int>> {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    auto kv = it->second;
    entries.erase(it);
    return kv;
  };
  auto require = [&](const std::string& key) {
    auto kv = take(key);
    if (!kv) throw std::runtime_error(path + ": missing required key " + key);
    return *kv;
  };
  auto as_double = [&](const std::pair<std::string, int>& kv) {
    double v = 0.0;
    if (!parse_double(kv.first, v)) {
      parse_fail(path, kv.second, "expected a number, got '" + kv.first + "'");
    }
    return v;
  };
  auto as_vector = [&](const std::pair<std::string, int>& kv, int expected) {
    std::string cleaned = kv.first;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream ss(cleaned);
    std::vector<double> vals;
    std::string tok;
    while (ss >> tok) {
      double v = 0.0;
      if (!parse_double(tok, v)) {
        parse_fail(path, kv.second, "expected numbers, got '" + tok + "'");
      }
      vals.push_back(v);
    }
    if (int(vals.size()) != expected) {
      std::ostringstream what;
      what << "expected " << expected << " coefficients, found " << vals.size();
      parse_fail(path, kv.second, what.str());
    }
    return Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size()).eval();
  };

  ModelSpec spec;
  spec.order = int(as_double(require("K")));
  if (spec.order < 1) throw std::runtime_error(path + ": K must be >= 1");
  spec.a_uu = as_vector(require("a_uu"), spec.order);
  spec.a_uv = as_vector(require("a_uv"), spec.order);
  spec.a_vv = as_vector(require("a_vv"), spec.order);
  spec.sigma2_eta_u = as_double(require("sigma2_eta_u"));
  spec.sigma2_eta_v = as_double(require("sigma2_eta_v"));
  if (auto kv = take("field")) {
    if (kv->first == "complex") {
      spec.field = Field::kComplex;
    } else if (kv->first == "real") {
      spec.field = Field::kReal;
    } else {
      parse_fail(path, kv->second, "field must be 'real' or 'complex'");
    }
  }
  if (auto kv = take("sigma2_nu_x")) spec.sigma2_nu_x = as_double(*kv);
  if (auto kv = take("sigma2_nu_y")) spec.sigma2_nu_y = as_double(*kv);
  if (auto kv = take("snr_x_db")) spec.snr_x_db = as_double(*kv);
  if (auto kv = take("snr_y_db")) spec.snr_y_db = as_double(*kv);
  if (spec.sigma2_nu_x && spec.snr_x_db) {
    throw std::runtime_error(path + ": give sigma2_nu_x or snr_x_db, not both");
  }
  if (spec.sigma2_nu_y && spec.snr_y_db) {
    throw std::runtime_error(path + ": give sigma2_nu_y or snr_y_db, not both");
  }
  if (!entries.empty()) {
    const auto& [key, kv] = *entries.begin();
    parse_fail(path, kv.second, "unknown key " + key);
  }
  return spec;
}

}  // namespace granger
