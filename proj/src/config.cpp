#include "qpdl/config.hpp"

#include "qpdl/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>
#include <vector>

namespace qpdl {

RunConfig::RunConfig() = default;

static std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  RunConfig cfg;
  std::string line, section;
  while (std::getline(in, line)) {
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config: bad line: " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!section.empty()) key = section + "." + key;
    cfg.kv_[key] = value;
  }
  return cfg;
}

std::string RunConfig::get_str(const std::string& key, const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::size_t pos = 0;
  double v = std::stod(it->second, &pos);
  if (pos != it->second.size())
    throw std::invalid_argument("config: bad numeric value for " + key);
  return v;
}

int RunConfig::get_int(const std::string& key, int fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::size_t pos = 0;
  int v = std::stoi(it->second, &pos);
  if (pos != it->second.size())
    throw std::invalid_argument("config: bad integer value for " + key);
  return v;
}

std::uint64_t RunConfig::seed() const {
  return static_cast<std::uint64_t>(get_double("seed", 12345.0));
}

int RunConfig::dim() const {
  std::string spec = get_str("frequency.omega", "golden");
  if (spec == "golden") return 1;
  return static_cast<int>(std::count(spec.begin(), spec.end(), ',')) + 1;
}

Frequency RunConfig::frequency() const {
  std::string spec = get_str("frequency.omega", "golden");
  double gamma = get_double("frequency.gamma", 0.1);
  double tau = get_double("frequency.tau", 2.0);
  int k_check = get_int("frequency.kcheck", 200);
  if (spec == "golden") return Frequency::golden(gamma, tau, k_check);
  std::vector<double> vals;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
  Eigen::VectorXd omega(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) omega[static_cast<int>(i)] = vals[i];
  return Frequency(omega, gamma, tau, k_check);
}

ScalarFourier RunConfig::potential() const {
  std::string kind = get_str("potential.kind", "cosine");
  double eps = get_double("potential.eps", 1e-3);
  int dim = this->dim();
  if (kind == "none" || eps == 0.0) return ScalarFourier::zero(dim);
  if (kind == "cosine") return ScalarFourier::cosine(eps, dim);
  if (kind == "random") {
    double r = get_double("potential.r", 0.5);
    int k_max = get_int("potential.kmax", 8);
    return ScalarFourier::random_analytic(eps, r, k_max, seed(), dim);
  }
  if (kind == "table") {
    // semicolon-separated mode triples "k1 .. kd : re : im"
    ScalarFourier v(dim);
    std::stringstream ss(get_str("potential.modes", ""));
    std::string entry;
    while (std::getline(ss, entry, ';')) {
      std::stringstream es(entry);
      std::string part;
      std::vector<std::string> parts;
      while (std::getline(es, part, ':')) parts.push_back(part);
      if (parts.size() != 3) throw std::invalid_argument("config: bad potential mode " + entry);
      Eigen::VectorXi k(dim);
      std::stringstream ks(parts[0]);
      for (int i = 0; i < dim; ++i) ks >> k[i];
      v.set_pair(k, Complex(std::stod(parts[1]), std::stod(parts[2])));
    }
    return v;
  }
  throw std::invalid_argument("config: unknown potential kind " + kind);
}

KamSchedule RunConfig::schedule(int levels) const {
  KamSchedule s = KamSchedule::make(get_double("schedule.eps0", 1e-3), levels,
                                    get_int("schedule.nmin", 20));
  s.radius = get_double("schedule.radius", 0.5);
  s.nonres_beta = get_double("schedule.nonres_beta", 0.5);
  s.eps_star_proxy = get_double("schedule.eps_star", 0.25);
  return s;
}

int worker_count() {
  if (const char* env = std::getenv("QPDL_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  int workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace qpdl
