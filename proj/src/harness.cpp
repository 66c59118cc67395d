#include "covlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "covlab/causal.hpp"
#include "covlab/diracfield.hpp"
#include "covlab/netfunctor.hpp"
#include "covlab/scalarfield.hpp"

namespace covlab {

namespace {

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, v));
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long n = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("{}: expected an integer, got '{}'", key, v));
  }
}

std::optional<double> parse_optional(const std::string& key, const std::string& v) {
  if (v == "auto") return std::nullopt;
  return parse_double(key, v);
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

Setter dbl(double RunConfig::*field) {
  return [field](RunConfig& c, const std::string& k, const std::string& v) { c.*field = parse_double(k, v); };
}

Setter integer(int RunConfig::*field) {
  return [field](RunConfig& c, const std::string& k, const std::string& v) {
    c.*field = static_cast<int>(parse_int(k, v));
  };
}

Setter sandwich_dbl(double SandwichParams::*field) {
  return [field](RunConfig& c, const std::string& k, const std::string& v) {
    c.sandwich.*field = parse_double(k, v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"model.t_min", dbl(&RunConfig::t_min)},
      {"model.t_max", dbl(&RunConfig::t_max)},
      {"model.circumference", dbl(&RunConfig::circumference)},
      {"model.t_past", sandwich_dbl(&SandwichParams::t_past)},
      {"model.t_fut", sandwich_dbl(&SandwichParams::t_fut)},
      {"model.a0", sandwich_dbl(&SandwichParams::a0)},
      {"model.amplitude", sandwich_dbl(&SandwichParams::amplitude)},
      {"model.modulation", sandwich_dbl(&SandwichParams::modulation)},
      {"model.lapse_amplitude", sandwich_dbl(&SandwichParams::lapse_amplitude)},
      {"model.mode",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.sandwich.mode = static_cast<int>(parse_int(k, v));
       }},
      {"lattice.nt", integer(&RunConfig::nt)},
      {"lattice.nx", integer(&RunConfig::nx)},
      {"lattice.cfl", dbl(&RunConfig::cfl)},
      {"fields.scalar_mass", dbl(&RunConfig::scalar_mass)},
      {"fields.dirac_mass", dbl(&RunConfig::dirac_mass)},
      {"fields.fock_cutoff", integer(&RunConfig::fock_cutoff)},
      {"points.t", dbl(&RunConfig::point_t)},
      {"points.x1", dbl(&RunConfig::point_x1)},
      {"points.x2", dbl(&RunConfig::point_x2)},
      {"deformation.t_sigma",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.t_sigma = parse_optional(k, v); }},
      {"deformation.t_sigma1",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.t_sigma1 = parse_optional(k, v); }},
      {"deformation.t_sigma2",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.t_sigma2 = parse_optional(k, v); }},
      {"deformation.lapse_dip", dbl(&RunConfig::lapse_dip)},
      {"deformation.sabotage",
       [](RunConfig& c, const std::string&, const std::string& v) { c.sabotage = sabotage_from_string(v); }},
      {"tolerances.locality", dbl(&RunConfig::tol_locality)},
      {"tolerances.witness", dbl(&RunConfig::tol_witness)},
      {"tolerances.pairing", dbl(&RunConfig::tol_pairing)},
      {"tolerances.cauchy", dbl(&RunConfig::tol_cauchy)},
      {"tolerances.support", dbl(&RunConfig::tol_support)},
      {"tolerances.product_zero", dbl(&RunConfig::tol_product_zero)},
      {"checks.random_pairs", integer(&RunConfig::random_pairs)},
      {"checks.random_triples", integer(&RunConfig::random_triples)},
      {"checks.ccr_modes", integer(&RunConfig::ccr_modes)},
      {"propagate.t", dbl(&RunConfig::propagate_t)},
      {"propagate.x", dbl(&RunConfig::propagate_x)},
      {"propagate.rt", dbl(&RunConfig::propagate_rt)},
      {"propagate.rx", dbl(&RunConfig::propagate_rx)},
      {"propagate.theory",
       [](RunConfig& c, const std::string&, const std::string& v) { c.propagate_theory = v; }},
      {"run.seed",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const long long s = parse_int(k, v);
         if (s < 0) throw ConfigError("run.seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"run.out_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; }},
  };
  return table;
}

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json("auto");
}

}  // namespace

RunConfig RunConfig::parse(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("config: {}", e.message()));
  }
  RunConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(fmt::format("config: key '{}' outside a section", section));
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = setters().find(full);
      if (it == setters().end()) throw ConfigError(fmt::format("config: unknown key '{}'", full));
      it->second(c, full, value.get_value<std::string>());
    }
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path));
  return parse(in);
}

void RunConfig::validate() const {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("config: " + msg);
  };
  need(t_max > t_min && circumference > 0.0, "need t_max > t_min and circumference > 0");
  need(nt >= 8 && nx >= 8, "lattice sizes must be >= 8");
  need(cfl > 0.0, "cfl must be positive");
  need(scalar_mass > 0.0, "scalar_mass must be > 0 (ground state)");
  need(dirac_mass >= 0.0, "dirac_mass must be >= 0");
  need(fock_cutoff >= 1 && fock_cutoff <= 10, "fock_cutoff must be in [1, 10]");
  need(point_t > t_min && point_t < t_max, "points.t outside the time range");
  need(point_x1 >= 0.0 && point_x1 < circumference && point_x2 >= 0.0 && point_x2 < circumference,
       "points.x1/x2 must lie in [0, circumference)");
  need(lapse_dip >= 0.0 && lapse_dip < 1.0, "lapse_dip must be in [0, 1)");
  for (double t : {tol_locality, tol_witness, tol_pairing, tol_cauchy, tol_support, tol_product_zero}) {
    need(t > 0.0 && std::isfinite(t), "tolerances must be positive");
  }
  need(random_pairs >= 1 && random_triples >= 1, "random_pairs and random_triples must be >= 1");
  need(ccr_modes >= 1 && ccr_modes <= 10, "ccr_modes must be in [1, 10]");
  need(propagate_theory == "scalar" || propagate_theory == "dirac", "propagate.theory must be scalar or dirac");
  need(propagate_rt > 0.0 && propagate_rx > 0.0, "propagate radii must be positive");
  need(!out_dir.empty(), "out_dir must not be empty");
}

void RunConfig::scale_tolerances(double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw ConfigError("tolerance scale must be positive");
  tol_locality *= factor;
  tol_pairing *= factor;
  tol_cauchy *= factor;
  tol_support *= factor;
  tol_product_zero *= factor;
  tol_witness /= factor;
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = {{"t_min", t_min},
                {"t_max", t_max},
                {"circumference", circumference},
                {"t_past", sandwich.t_past},
                {"t_fut", sandwich.t_fut},
                {"a0", sandwich.a0},
                {"amplitude", sandwich.amplitude},
                {"modulation", sandwich.modulation},
                {"lapse_amplitude", sandwich.lapse_amplitude},
                {"mode", sandwich.mode}};
  j["lattice"] = {{"nt", nt}, {"nx", nx}, {"cfl", cfl}};
  j["fields"] = {{"scalar_mass", scalar_mass}, {"dirac_mass", dirac_mass}, {"fock_cutoff", fock_cutoff}};
  j["points"] = {{"t", point_t}, {"x1", point_x1}, {"x2", point_x2}};
  j["deformation"] = {{"t_sigma", optional_json(t_sigma)},
                      {"t_sigma1", optional_json(t_sigma1)},
                      {"t_sigma2", optional_json(t_sigma2)},
                      {"lapse_dip", lapse_dip},
                      {"sabotage", to_string(sabotage)}};
  j["tolerances"] = {{"locality", tol_locality}, {"witness", tol_witness},   {"pairing", tol_pairing},
                     {"cauchy", tol_cauchy},     {"support", tol_support},   {"product_zero", tol_product_zero}};
  j["checks"] = {{"random_pairs", random_pairs}, {"random_triples", random_triples}, {"ccr_modes", ccr_modes}};
  j["propagate"] = {{"t", propagate_t},
                    {"x", propagate_x},
                    {"rt", propagate_rt},
                    {"rx", propagate_rx},
                    {"theory", propagate_theory}};
  j["run"] = {{"seed", seed}, {"out_dir", out_dir}};
  return j;
}

MetricModel RunConfig::model() const { return MetricModel::sandwich(sandwich, t_min, t_max, circumference); }

Lattice RunConfig::lattice(const MetricModel& m) const { return build_lattice(m, nt, nx, cfl); }

DeformationSpec RunConfig::deformation_spec(const MetricModel& m, const Lattice& lat) const {
  DeformationSpec s = DeformationSpec::defaults(m, lat.nearest(point_t, point_x1), lat.nearest(point_t, point_x2));
  if (t_sigma) s.t_sigma = *t_sigma;
  if (t_sigma1) s.t_sigma1 = *t_sigma1;
  if (t_sigma2) s.t_sigma2 = *t_sigma2;
  s.lapse_dip = lapse_dip;
  s.sabotage = sabotage;
  return s;
}

Margin Margin::below(std::string name, double value, double threshold) {
  return {std::move(name), value, threshold, "<", std::isfinite(value) && value < threshold};
}

Margin Margin::above(std::string name, double value, double threshold) {
  return {std::move(name), value, threshold, ">", std::isfinite(value) && value > threshold};
}

std::optional<Margin> StageResult::first_failure() const {
  for (const auto& m : margins)
    if (!m.pass) return m;
  return std::nullopt;
}

namespace {

nlohmann::ordered_json margin_json(const Margin& m) {
  nlohmann::ordered_json j;
  j["name"] = m.name;
  j["value"] = m.value;
  j["threshold"] = m.threshold;
  j["relation"] = m.relation;
  j["pass"] = m.pass;
  return j;
}

std::string stage_failure_text(const StageResult& s) {
  if (s.skipped) return fmt::format("stage {} skipped", s.id);
  const auto m = s.first_failure();
  if (m) return fmt::format("failed at stage {} ({}: {:.3e} {} {:.3e} does not hold)", s.id, m->name, m->value,
                            m->relation, m->threshold);
  return fmt::format("failed at stage {} ({})", s.id, s.detail);
}

std::string branch_verdict(const std::vector<StageResult>& stages, const std::string& branch) {
  for (const auto& s : stages) {
    if (s.branch != "common" && s.branch != branch) continue;
    if (!s.pass) return stage_failure_text(s);
  }
  return kConfirmed;
}

}  // namespace

nlohmann::ordered_json SpinStatReport::to_json() const {
  nlohmann::ordered_json j;
  j["config"] = config;
  j["stages"] = nlohmann::ordered_json::array();
  for (const auto& s : stages) {
    nlohmann::ordered_json sj;
    sj["id"] = s.id;
    sj["name"] = s.name;
    sj["branch"] = s.branch;
    sj["pass"] = s.pass;
    sj["skipped"] = s.skipped;
    sj["detail"] = s.detail;
    sj["margins"] = nlohmann::ordered_json::array();
    for (const auto& m : s.margins) sj["margins"].push_back(margin_json(m));
    j["stages"].push_back(sj);
  }
  j["verdict"] = {{"integer", verdict_integer}, {"half-integer", verdict_half_integer}, {"overall", verdict}};
  return j;
}

std::string SpinStatReport::to_text() const {
  std::ostringstream out;
  out << "spin-statistics pipeline\n";
  for (const auto& s : stages) {
    out << fmt::format("stage {} [{}] {}: {}\n", s.id, s.branch, s.name,
                       s.skipped ? "SKIPPED" : (s.pass ? "PASS" : "FAIL"));
    for (const auto& m : s.margins) {
      out << fmt::format("    {:<52} {:>12.4e} {} {:<10.3e} {}\n", m.name, m.value, m.relation, m.threshold,
                         m.pass ? "ok" : "VIOLATED");
    }
    if (!s.detail.empty()) out << "    " << s.detail << "\n";
  }
  out << "verdict (integer spin):      " << verdict_integer << "\n";
  out << "verdict (half-integer spin): " << verdict_half_integer << "\n";
  out << "verdict:                     " << verdict << "\n";
  out << "Each stage checks one implication of the argument on the lattice; the continuum statement is not claimed.\n";
  return out.str();
}

std::string recheck_report(const nlohmann::ordered_json& report) {
  try {
    std::vector<StageResult> stages;
    for (const auto& sj : report.at("stages")) {
      StageResult s;
      s.id = sj.at("id").get<int>();
      s.name = sj.at("name").get<std::string>();
      s.branch = sj.at("branch").get<std::string>();
      s.skipped = sj.at("skipped").get<bool>();
      s.detail = sj.at("detail").get<std::string>();
      bool all = !sj.at("margins").empty();
      for (const auto& mj : sj.at("margins")) {
        const double value = mj.at("value").is_number() ? mj.at("value").get<double>() : std::nan("");
        const double threshold = mj.at("threshold").get<double>();
        const std::string rel = mj.at("relation").get<std::string>();
        Margin m = rel == "<" ? Margin::below(mj.at("name").get<std::string>(), value, threshold)
                              : Margin::above(mj.at("name").get<std::string>(), value, threshold);
        if (rel != "<" && rel != ">") return fmt::format("stage {}: unknown relation '{}'", s.id, rel);
        if (m.pass != mj.at("pass").get<bool>()) {
          return fmt::format("stage {}: margin '{}' recorded pass={} but recomputes to {}", s.id, m.name,
                             mj.at("pass").get<bool>(), m.pass);
        }
        all = all && m.pass;
        s.margins.push_back(m);
      }
      s.pass = !s.skipped && all;
      if (s.pass != sj.at("pass").get<bool>()) {
        return fmt::format("stage {}: recorded pass={} but margins give {}", s.id, sj.at("pass").get<bool>(), s.pass);
      }
      stages.push_back(std::move(s));
    }
    const auto& v = report.at("verdict");
    const std::string vi = branch_verdict(stages, "integer");
    const std::string vh = branch_verdict(stages, "half-integer");
    const bool both = vi == kConfirmed && vh == kConfirmed;
    if (v.at("integer").get<std::string>() != vi) return "integer verdict does not follow from the stages";
    if (v.at("half-integer").get<std::string>() != vh) return "half-integer verdict does not follow from the stages";
    if ((v.at("overall").get<std::string>() == kConfirmed) != both) return "overall verdict does not follow";
    if (v.at("overall").get<std::string>() == kConfirmed) {
      for (const auto& s : stages)
        for (const auto& m : s.margins)
          if (!m.pass) return fmt::format("confirmed verdict with violated margin '{}'", m.name);
    }
  } catch (const nlohmann::json::exception& e) {
    return fmt::format("malformed report: {}", e.what());
  }
  return {};
}

FactorModel::FactorModel(Eigen::MatrixXcd rho1, Eigen::MatrixXcd rho2) : rho1_(std::move(rho1)), rho2_(std::move(rho2)) {
  for (const Eigen::MatrixXcd* r : {&rho1_, &rho2_}) {
    if (r->rows() < 1 || r->rows() != r->cols()) throw ConfigError("factor model: density matrices must be square");
    if ((*r - r->adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw ConfigError("factor model: density not Hermitian");
    if (std::abs(r->trace() - cplx(1.0, 0.0)) > 1e-12) throw ConfigError("factor model: density needs unit trace");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(*r);
    if (es.eigenvalues().minCoeff() <= 0.0) throw ConfigError("factor model: state is not faithful");
  }
}

FactorModel::FactorModel(int d1, int d2)
    : FactorModel(Eigen::MatrixXcd::Identity(std::max(d1, 1), std::max(d1, 1)) / static_cast<double>(std::max(d1, 1)),
                  Eigen::MatrixXcd::Identity(std::max(d2, 1), std::max(d2, 1)) / static_cast<double>(std::max(d2, 1))) {
  if (d1 < 1 || d2 < 1) throw ConfigError("factor model: dimensions must be >= 1");
}

namespace {

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double opnorm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

Eigen::MatrixXcd FactorModel::left(const Eigen::MatrixXcd& a) const {
  if (a.rows() != rho1_.rows() || a.cols() != rho1_.cols()) throw DomainError("left operand has the wrong size");
  return kron(a, Eigen::MatrixXcd::Identity(rho2_.rows(), rho2_.rows()));
}

Eigen::MatrixXcd FactorModel::right(const Eigen::MatrixXcd& b) const {
  if (b.rows() != rho2_.rows() || b.cols() != rho2_.cols()) throw DomainError("right operand has the wrong size");
  return kron(Eigen::MatrixXcd::Identity(rho1_.rows(), rho1_.rows()), b);
}

std::optional<Eigen::MatrixXcd> FactorModel::left_factor(const Eigen::MatrixXcd& big, double tol) const {
  const Eigen::Index d1 = rho1_.rows(), d2 = rho2_.rows();
  if (big.rows() != d1 * d2 || big.cols() != d1 * d2) return std::nullopt;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d1, d1);
  for (Eigen::Index i = 0; i < d1; ++i)
    for (Eigen::Index j = 0; j < d1; ++j)
      for (Eigen::Index k = 0; k < d2; ++k) a(i, j) += big(i * d2 + k, j * d2 + k);
  a /= static_cast<double>(d2);
  if ((big - left(a)).cwiseAbs().maxCoeff() > tol * std::max(1.0, big.cwiseAbs().maxCoeff())) return std::nullopt;
  return a;
}

std::optional<Eigen::MatrixXcd> FactorModel::right_factor(const Eigen::MatrixXcd& big, double tol) const {
  const Eigen::Index d1 = rho1_.rows(), d2 = rho2_.rows();
  if (big.rows() != d1 * d2 || big.cols() != d1 * d2) return std::nullopt;
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(d2, d2);
  for (Eigen::Index k = 0; k < d1; ++k) b += big.block(k * d2, k * d2, d2, d2);
  b /= static_cast<double>(d1);
  if ((big - right(b)).cwiseAbs().maxCoeff() > tol * std::max(1.0, big.cwiseAbs().maxCoeff())) return std::nullopt;
  return b;
}

double FactorModel::expectation(const Eigen::MatrixXcd& big) const {
  return (kron(rho1_, rho2_) * big).trace().real();
}

double FactorModel::commutation_defect(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) const {
  const Eigen::MatrixXcd l = left(a);
  const Eigen::MatrixXcd r = right(b);
  const Eigen::MatrixXcd c = l * r - r * l;
  return c.cwiseAbs().maxCoeff();
}

std::string to_string(SchliederOutcome o) {
  switch (o) {
    case SchliederOutcome::FirstZero:
      return "A1_zero";
    case SchliederOutcome::SecondZero:
      return "A2_zero";
    case SchliederOutcome::Violation:
      return "violation";
  }
  return "unknown";
}

SchliederOutcome schlieder_check(const FactorModel& model, const Eigen::MatrixXcd& a1, const Eigen::MatrixXcd& a2,
                                 double tol) {
  const auto f1 = model.left_factor(a1);
  if (!f1) throw DomainError("schlieder_check: A1 is not in M (x) 1");
  const auto f2 = model.right_factor(a2);
  if (!f2) throw DomainError("schlieder_check: A2 is not in 1 (x) N");
  const Eigen::MatrixXcd prod = a1 * a2;
  const double p = opnorm(prod);
  if (p > tol) throw DomainError(fmt::format("schlieder_check: A1 A2 does not vanish (norm {:.3e})", p));
  const double n1 = opnorm(*f1), n2 = opnorm(*f2);
  const double zero = std::sqrt(tol);
  if (std::min(n1, n2) > zero) return SchliederOutcome::Violation;
  return n1 <= n2 ? SchliederOutcome::FirstZero : SchliederOutcome::SecondZero;
}

Eigen::MatrixXcd top_spectral_projection(const Eigen::MatrixXcd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(h.rows(), h.cols());
  if (top == 0.0) return p;
  const double lead = std::abs(ev(0)) >= std::abs(ev(ev.size() - 1)) ? ev(0) : ev(ev.size() - 1);
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    if (std::abs(ev(k) - lead) <= 1e-9 * top) p += es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
  return p;
}

bool CheckReport::pass() const {
  return !margins.empty() && std::all_of(margins.begin(), margins.end(), [](const Margin& m) { return m.pass; });
}

nlohmann::ordered_json CheckReport::to_json() const {
  nlohmann::ordered_json j;
  j["check"] = name;
  j["pass"] = pass();
  j["detail"] = detail;
  j["margins"] = nlohmann::ordered_json::array();
  for (const auto& m : margins) j["margins"].push_back(margin_json(m));
  if (!data.is_null()) j["data"] = data;
  return j;
}
namespace {

using StageBody = std::function<void(StageResult&)>;

StageResult run_stage(int id, std::string name, std::string branch, bool ready, const StageBody& body) {
  StageResult s;
  s.id = id;
  s.name = std::move(name);
  s.branch = std::move(branch);
  if (!ready) {
    s.skipped = true;
    s.detail = "skipped: a prerequisite stage failed";
    return s;
  }
  try {
    body(s);
  } catch (const std::exception& e) {
    s.detail = e.what();
  }
  s.pass = !s.margins.empty() &&
           std::all_of(s.margins.begin(), s.margins.end(), [](const Margin& m) { return m.pass; });
  return s;
}

Margin indicator(std::string name, bool ok) { return Margin::below(std::move(name), ok ? 0.0 : 1.0, 0.5); }

// Centre slice and column of a region together with its half extents.
struct RegionBox {
  double t0 = 0.0, x0 = 0.0, rt = 0.0, rx = 0.0;
};

RegionBox fit_box(const Lattice& lat, const Region& u, Site anchor) {
  const auto [jlo, jhi] = u.slice_range(lat);
  const int jm = (jlo + jhi) / 2;
  int width = 0;
  for (int i = 0; i < lat.nx; ++i) width += u.contains(lat.index(jm, i)) ? 1 : 0;
  return {lat.t(jm), lat.x(anchor.i), 0.5 * (jhi - jlo) * lat.dt, 0.5 * width * lat.dx};
}

template <class Make>
auto fit_inside(const Lattice& lat, const Region& u, Site anchor, const std::string& what, Make make) {
  RegionBox b = fit_box(lat, u, anchor);
  for (int attempt = 0; attempt < 40; ++attempt) {
    auto f = make(b);
    if (f.support().subset_of(u) && !f.support().empty()) return f;
    b.rx *= 0.85;
    if (attempt % 4 == 3) b.rt *= 0.9;
  }
  throw DiagnosticError(fmt::format("no bump fits inside {}", what));
}

double rel_max(const Eigen::VectorXd& r, const Eigen::VectorXd& ref) {
  const double s = ref.cwiseAbs().maxCoeff();
  return s > 0.0 ? r.cwiseAbs().maxCoeff() / s : r.cwiseAbs().maxCoeff();
}

double rel_max(const Eigen::VectorXcd& r, const Eigen::VectorXcd& ref) {
  const double s = ref.cwiseAbs().maxCoeff();
  return s > 0.0 ? r.cwiseAbs().maxCoeff() / s : r.cwiseAbs().maxCoeff();
}

Eigen::VectorXd weighted(const ScalarKernel& k, const Eigen::VectorXd& f) { return k.weights().cwiseProduct(f); }

Eigen::VectorXcd weighted(const DiracKernel& k, const Eigen::VectorXcd& f) {
  const Lattice& lat = k.lattice();
  Eigen::VectorXcd out = f;
  for (int j = 0; j < lat.nt; ++j)
    for (int i = 0; i < lat.nx; ++i) {
      const double w = k.weight(j, i);
      out(2 * lat.index(j, i)) *= w;
      out(2 * lat.index(j, i) + 1) *= w;
    }
  return out;
}

Eigen::VectorXd site_norms(const Eigen::VectorXcd& u) {
  Eigen::VectorXd out(u.size() / 2);
  for (Eigen::Index k = 0; k < out.size(); ++k) out(k) = std::hypot(std::abs(u(2 * k)), std::abs(u(2 * k + 1)));
  return out;
}

template <class Kernel, class Vec>
void support_margins(StageResult& s, const std::string& label, const Kernel& kernel, const CausalGraph& graph,
                     const Vec& f, const Region& supp, double tol_support, double tol_residual) {
  const Vec ret = kernel.solve_retarded(f);
  const Vec adv = kernel.solve_advanced(f);
  const Region jp = graph.dilate(graph.dilate(graph.future(supp)));
  const Region jm = graph.dilate(graph.dilate(graph.past(supp)));
  if constexpr (std::is_same_v<Vec, Eigen::VectorXd>) {
    s.margins.push_back(Margin::below(label + ": mass of E+ f outside J+(supp f)", mass_fraction_outside(ret, jp),
                                      tol_support));
    s.margins.push_back(Margin::below(label + ": mass of E- f outside J-(supp f)", mass_fraction_outside(adv, jm),
                                      tol_support));
  } else {
    s.margins.push_back(Margin::below(label + ": mass of S+ f outside J+(supp f)",
                                      mass_fraction_outside(site_norms(ret), jp), tol_support));
    s.margins.push_back(Margin::below(label + ": mass of S- f outside J-(supp f)",
                                      mass_fraction_outside(site_norms(adv), jm), tol_support));
  }
  const Vec wf = weighted(kernel, f);
  const Vec res = kernel.apply_operator(ret) - wf;
  s.margins.push_back(Margin::below(label + ": residual of the retarded solve", rel_max(res, wf), tol_residual));
}

double max_rel(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  const double diff = (a - b).cwiseAbs().maxCoeff();
  return scale > 0.0 ? diff / scale : diff;
}

// The eps-scaled projection that wrong statistics would force on the second
// factor, checked by the bipartite model.
void schlieder_margins(StageResult& s, const Eigen::MatrixXcd& h1, const Eigen::MatrixXcd& h2, double eps,
                       const RunConfig& c) {
  const Eigen::MatrixXcd e1 = top_spectral_projection(h1);
  const Eigen::MatrixXcd e2 = top_spectral_projection(h2);
  const FactorModel model(static_cast<int>(e1.rows()), static_cast<int>(e2.rows()));
  const Eigen::MatrixXcd a1 = model.left(e1);
  const Eigen::MatrixXcd a2_forced = model.right(eps * e2);
  const Eigen::MatrixXcd prod = a1 * a2_forced;
  const double forced = prod.cwiseAbs().maxCoeff();
  const Eigen::MatrixXcd actual_prod = a1 * model.right(e2);
  const double actual = opnorm(actual_prod);
  s.margins.push_back(Margin::below("forced product E1 (x) eps E2 (eps = defect / 2)", eps, c.tol_product_zero));
  s.margins.push_back(
      Margin::below("commutation defect [M (x) 1, 1 (x) N]", model.commutation_defect(e1, e2), c.tol_locality));
  s.margins.push_back(Margin::above("|E1 E2| without the wrong statistics", actual, 0.5));
  const SchliederOutcome o = schlieder_check(model, a1, a2_forced, c.tol_product_zero);
  s.margins.push_back(indicator(fmt::format("Schlieder outcome names a vanishing factor ({})", to_string(o)),
                                o != SchliederOutcome::Violation));
  s.detail = fmt::format(
      "forced product norm {:.3e}; Schlieder step returns {}, so wrong statistics would make the field "
      "trivial while the actual spectral projections have nonzero product",
      forced, to_string(o));
}

}  // namespace

SpinStatReport run_spinstat(const RunConfig& c) {
  c.validate();
  SpinStatReport report;
  report.config = c.to_json();

  const MetricModel model = c.model();
  const Lattice lat = c.lattice(model);
  std::shared_ptr<const CausalGraph> graph;
  Site p1{}, p2{};
  std::optional<DeformedSpacetime> def;
  std::optional<ScalarKernel> sk;
  std::optional<DiracKernel> dk;
  std::optional<TestFunction> f1, f2;
  std::optional<SpinorTestFunction> g1, g2;
  std::vector<StageResult>& st = report.stages;

  st.push_back(run_stage(1, "spacetime M and points p1, p2", "common", true, [&](StageResult& s) {
    graph = std::make_shared<const CausalGraph>(model, lat);
    p1 = lat.nearest(c.point_t, c.point_x1);
    p2 = lat.nearest(c.point_t, c.point_x2);
    const double t_fut = model.sandwich_params() ? model.sandwich_params()->t_fut : model.t_min();
    s.margins.push_back(Margin::above("t(p) - end of the curved band", std::min(lat.t(p1.j), lat.t(p2.j)) - t_fut, 0.0));
    const Region j1 = graph->causal_shadow(graph->region({p1}));
    s.margins.push_back(indicator("p2 outside J(p1)", !j1.contains(lat.index(p2))));
    s.detail = fmt::format("p1 = ({}, {}), p2 = ({}, {}) on a {}x{} lattice", p1.j, p1.i, p2.j, p2.i, lat.nt, lat.nx);
  }));

  st.push_back(run_stage(2, "deformation certificate", "common", st[0].pass, [&](StageResult& s) {
    def = build_deformation(model, lat, c.deformation_spec(model, lat));
    const DeformationCertificate cert = certify(*def);
    for (const auto& cl : cert.clauses) {
      s.margins.push_back(indicator(fmt::format("clause {}: {}", cl.clause, cl.detail), cl.pass));
      if (cl.clause == "c") s.margins.push_back(Margin::below("clause c: max |R| on G^", cl.margin, 1e-8));
    }
    const auto failed = cert.failed();
    s.detail = failed.empty() ? "all clauses hold"
                              : fmt::format("failed clauses: {}", fmt::join(failed, ", "));
    report.artifacts.lattice = def->lattice;
    report.artifacts.regions = {{"U1", def->u[0]},       {"U2", def->u[1]},       {"U1_tilde", def->u_tilde[0]},
                                {"U2_tilde", def->u_tilde[1]}, {"U1_hat", def->u_hat[0]}, {"U2_hat", def->u_hat[1]},
                                {"G", def->g},            {"G_hat", def->g_hat},   {"N_plus", def->n_plus}};
  }));

  st.push_back(run_stage(3, "propagators on the deformed spacetime", "common", st[1].pass, [&](StageResult& s) {
    const Lattice& dl = def->lattice;
    sk.emplace(def->model, dl, c.scalar_mass);
    dk.emplace(def->model, dl, c.dirac_mass);
    for (int k = 0; k < 2; ++k) {
      const Region& u = def->u[static_cast<std::size_t>(k)];
      const Site anchor = def->p_tilde[static_cast<std::size_t>(k)];
      auto f = fit_inside(dl, u, anchor, fmt::format("U{}", k + 1), [&](const RegionBox& b) {
        return make_bump(dl, b.t0, b.x0, b.rt, b.rx, 1.0, fmt::format("f{}", k + 1));
      });
      auto g = fit_inside(dl, u, anchor, fmt::format("U{}", k + 1), [&](const RegionBox& b) {
        return make_spinor_bump(dl, b.t0, b.x0, b.rt, b.rx, cplx(1.0, 0.0), cplx(0.0, 0.5), fmt::format("g{}", k + 1));
      });
      support_margins(s, fmt::format("scalar f{}", k + 1), *sk, *def->graph, f.values, f.support(), c.tol_support,
                      c.tol_locality);
      support_margins(s, fmt::format("Dirac g{}", k + 1), *dk, *def->graph, g.values, g.support(), c.tol_support,
                      c.tol_locality);
      (k == 0 ? f1 : f2) = std::move(f);
      (k == 0 ? g1 : g2) = std::move(g);
    }
    report.artifacts.propagator = sk->causal_propagator(f1->values).cwiseAbs();
    s.detail = fmt::format("witness bumps inside U1 ({} sites) and U2 ({} sites)", f1->support().count(),
                           f2->support().count());
  }));

  const bool common_ok = st[2].pass;
  double kappa_eps = 0.0;
  std::optional<QuasifreeState> state;

  st.push_back(run_stage(4, "integer spin: locality and two-point witness", "integer", common_ok, [&](StageResult& s) {
    const SymplecticSpace space = SymplecticSpace::build(*sk, {*f1, *f2});
    state.emplace(QuasifreeState::build(*sk, def->model, space, 0));
    const Eigen::MatrixXcd& w = state->W();
    const double scale = std::sqrt(w(0, 0).real() * w(1, 1).real());
    const double kappa = space.kappa(0, 1);
    kappa_eps = std::abs(kappa) / (2.0 * scale);
    s.margins.push_back(Margin::below("|kappa(f1, f2)| / scale", std::abs(kappa) / scale, c.tol_locality));
    s.margins.push_back(Margin::above("|Re W(f1, f2)| / scale", std::abs(w(0, 1).real()) / scale, c.tol_witness));
    const FockRep rep(state->psi(), c.fock_cutoff);
    const Eigen::VectorXcd vac = rep.space().vacuum();
    const Eigen::VectorXcd phi2 = rep.field(1) * vac;
    const Eigen::VectorXcd phi1 = rep.field(0).adjoint() * vac;
    const cplx vev = phi1.dot(phi2);
    s.margins.push_back(Margin::below("|<Phi(f1) Phi(f2)> - W(f1, f2)| / scale", std::abs(vev - w(0, 1)) / scale,
                                      c.tol_pairing));
    s.detail = fmt::format(
        "scale = {:.4e}, kappa = {:.3e}, W12 = {:.4e}{:+.4e}i; an anticommuting field would force "
        "Phi(f1) Phi(f2) = i kappa / 2, contradicting <Phi(f1) Phi(f2)> = W12",
        scale, kappa, w(0, 1).real(), w(0, 1).imag());
  }));

  st.push_back(run_stage(5, "integer spin: Schlieder step", "integer", st[3].pass, [&](StageResult& s) {
    const FockRep r1(state->psi().col(0), c.fock_cutoff);
    const FockRep r2(state->psi().col(1), c.fock_cutoff);
    schlieder_margins(s, Eigen::MatrixXcd(r1.field(0)), Eigen::MatrixXcd(r2.field(0)), kappa_eps, c);
  }));

  st.push_back(run_stage(6, "half-integer spin: locality, witness and Schlieder step", "half-integer", common_ok,
                         [&](StageResult& s) {
                           const CARSpace space = CARSpace::build(*dk, {*g1, *g2});
                           const CARRep rep(space);
                           const AnticommutatorReport ar = spacelike_anticommutator(space, rep, 0, 1);
                           s.margins.push_back(
                               Margin::below("anticommutator pairing |s(g1,g2)| + |s(Cg1,g2)|", ar.anticommutator,
                                             c.tol_locality));
                           s.margins.push_back(
                               Margin::above("|[B(g1), B(g2)]|", ar.commutator_norm, c.tol_witness));
                           std::array<Eigen::MatrixXcd, 2> h;
                           for (int k = 0; k < 2; ++k) {
                             const CARSpace one = CARSpace::build(*dk, {k == 0 ? *g1 : *g2});
                             const CARRep r(one);
                             const Eigen::MatrixXcd b(r.field(0));
                             Eigen::MatrixXcd herm = b + b.adjoint();
                             if (herm.cwiseAbs().maxCoeff() <= 1e-12 * b.cwiseAbs().maxCoeff())
                               herm = cplx(0.0, 1.0) * (b - b.adjoint());
                             h[static_cast<std::size_t>(k)] = herm;
                           }
                           const std::string head = fmt::format(
                               "commutator {:.4e}; a commuting Dirac field would force B(g1) B(g2) = anticommutator / 2. ",
                               ar.commutator_norm);
                           schlieder_margins(s, h[0], h[1], ar.anticommutator / 2.0, c);
                           s.detail = head + s.detail;
                         }));

  st.push_back(run_stage(7, "transport chain M -> deformed -> flat pocket", "common", common_ok, [&](StageResult& s) {
    const Lattice& dl = def->lattice;
    const auto obj_m = SpacetimeObject::make("M", model, dl, def->source_graph);
    const auto obj_t = SpacetimeObject::make("M~", def->model, dl, def->graph);
    const MetricModel flat = MetricModel::minkowski(model.t_min(), model.t_max(), model.circumference(),
                                                    std::sqrt(def->gamma));
    const auto obj_f = SpacetimeObject::make("pocket", flat, dl);
    const Region u_tilde = def->u_tilde[0] | def->u_tilde[1];
    const Region u = def->u[0] | def->u[1];
    const auto pocket_iso = LocalIso::translation(obj_f, obj_t, u_tilde, 0, 0);
    const auto plus_iso = LocalIso::translation(obj_m, obj_t, u, 0, 0);

    for (const Theory th : {Theory::Scalar, Theory::Dirac}) {
      const TheorySpec spec{th, th == Theory::Scalar ? c.scalar_mass : c.dirac_mass};
      const std::string tag = to_string(th);
      std::vector<Eigen::VectorXcd> pocket, pushed;
      double cauchy = 0.0;
      for (int k = 0; k < 2; ++k) {
        const Region& ut = def->u_tilde[static_cast<std::size_t>(k)];
        const auto [jlo, jhi] = ut.slice_range(dl);
        for (int jj : {jlo, jhi}) {
          int col = -1;
          for (int o = 0; o < dl.nx && col < 0; ++o) {
            const int off = (o % 2 ? 1 : -1) * ((o + 1) / 2);
            const int idx = dl.index(jj, dl.wrap(def->p_tilde[static_cast<std::size_t>(k)].i + off));
            if (ut.contains(idx)) col = idx;
          }
          if (col < 0) throw DiagnosticError("empty pocket slice");
          if (th == Theory::Scalar) {
            TestFunction d{Eigen::VectorXd::Zero(dl.size()), "delta"};
            d.values(col) = 1.0;
            const StrictCausalResult r = strict_causal_law(*sk, *def->graph, d, def->u[static_cast<std::size_t>(k)]);
            cauchy = std::max(cauchy, r.cauchy_rel_error);
            pocket.emplace_back(d.values.cast<cplx>());
            pushed.emplace_back(r.f2.values.cast<cplx>());
          } else {
            SpinorTestFunction d{Eigen::VectorXcd::Zero(2 * dl.size()), "delta"};
            d.values(2 * col) = 1.0;
            d.values(2 * col + 1) = cplx(0.0, 0.5);
            const DiracStrictCausalResult r =
                dirac_strict_causal_law(*dk, *def->graph, d, def->u[static_cast<std::size_t>(k)]);
            cauchy = std::max(cauchy, r.data_rel_error);
            pocket.push_back(d.values);
            pushed.push_back(r.f2.values);
          }
        }
      }
      s.margins.push_back(Margin::below(tag + ": Cauchy data of the pushed functions", cauchy, c.tol_cauchy));
      const PairingReport pf = check_invariant_pairings(pocket_iso, *obj_f, *obj_t, spec, pocket, c.tol_pairing);
      s.margins.push_back(Margin::below(tag + ": flat pocket vs deformed on U~1 u U~2", pf.max_rel_error, c.tol_pairing));
      const Eigen::MatrixXcd gram_pocket = pairing_gram(*obj_t, spec, pocket);
      const Eigen::MatrixXcd gram_pushed = pairing_gram(*obj_t, spec, pushed);
      s.margins.push_back(
          Margin::below(tag + ": deformed, U~ functions vs their pushes into U", max_rel(gram_pocket, gram_pushed),
                        c.tol_pairing));
      const PairingReport pm = check_invariant_pairings(plus_iso, *obj_m, *obj_t, spec, pushed, c.tol_pairing);
      s.margins.push_back(Margin::below(tag + ": M vs deformed on U1 u U2 (N+ identification)", pm.max_rel_error,
                                        c.tol_pairing));
    }
    s.detail = "pairings agree along pocket -> U~j -> Uj -> M for both theories";
  }));

  report.verdict_integer = branch_verdict(st, "integer");
  report.verdict_half_integer = branch_verdict(st, "half-integer");
  if (report.verdict_integer == kConfirmed && report.verdict_half_integer == kConfirmed) {
    report.verdict = kConfirmed;
  } else {
    report.verdict = fmt::format("not confirmed; integer: {}; half-integer: {}", report.verdict_integer,
                                 report.verdict_half_integer);
  }
  return report;
}

}  // namespace covlab
