#include "replisim/policy.hpp"

#include <algorithm>
#include <cctype>

namespace replisim {

namespace {

__extension__ typedef __int128 i128;

// q * total < got, in integers.
bool exceeds(const Rational& q, std::uint64_t total, std::uint64_t got) {
  return static_cast<i128>(q.num) * total < static_cast<i128>(q.den) * got;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

Rational parse_rational(std::string_view s) {
  const std::string t = trim(s);
  const auto slash = t.find('/');
  if (slash == std::string::npos) throw ConfigError("quorum fraction must be written n/d: " + t);
  Rational q;
  try {
    q.num = std::stoll(t.substr(0, slash));
    q.den = std::stoll(t.substr(slash + 1));
  } catch (const std::exception&) {
    throw ConfigError("malformed quorum fraction: " + t);
  }
  if (q.num <= 0 || q.den <= 0 || q.num >= q.den) {
    throw ConfigError("quorum fraction must lie strictly between 0 and 1: " + t);
  }
  return q;
}

DataCentreId parse_dc(std::string_view s, const ClusterConfig& cfg) {
  const std::string name = trim(s);
  auto d = cfg.find_datacentre(name);
  if (!d) throw ConfigError("unknown data centre in policy: " + name);
  return *d;
}

bool all_in(const Selection& g, DataCentreId d) {
  return std::all_of(g.begin(), g.end(), [d](const NodeId& n) { return n.dc == d; });
}

}  // namespace

Policy parse_policy(std::string_view text, const ClusterConfig& cfg) {
  const std::string t = trim(text);
  const auto open = t.find('(');
  const std::string name = open == std::string::npos ? t : trim(t.substr(0, open));
  std::string args;
  if (open != std::string::npos) {
    if (t.back() != ')') throw ConfigError("unbalanced parenthesis in policy: " + t);
    args = t.substr(open + 1, t.size() - open - 2);
  }
  const auto comma = args.find(',');

  if (name == "ALL" && args.empty()) return Policy::all();
  if (name == "ONE" && args.empty()) return Policy::one();
  if (name == "TWO" && args.empty()) return Policy::two();
  if (name == "THREE" && args.empty()) return Policy::three();
  if (name == "QUORUM") return Policy::quorum(args.empty() ? Rational{} : parse_rational(args));
  if (name == "EACH_QUORUM") {
    return Policy::each_quorum(args.empty() ? Rational{} : parse_rational(args));
  }
  if (name == "LOCAL_ONE" && !args.empty()) return Policy::local_one(parse_dc(args, cfg));
  if (name == "LOCAL_QUORUM" && comma != std::string::npos) {
    return Policy::local_quorum(parse_rational(args.substr(0, comma)),
                                parse_dc(args.substr(comma + 1), cfg));
  }
  throw ConfigError("unknown policy: " + t);
}

std::string format_policy(const Policy& p, const ClusterConfig& cfg) {
  auto frac = [&] { return std::to_string(p.q.num) + "/" + std::to_string(p.q.den); };
  auto dc = [&] {
    return p.dc < cfg.datacentres.size() ? cfg.datacentres[p.dc].name : std::to_string(p.dc);
  };
  switch (p.kind) {
    case Policy::Kind::kAll: return "ALL";
    case Policy::Kind::kOne: return "ONE";
    case Policy::Kind::kTwo: return "TWO";
    case Policy::Kind::kThree: return "THREE";
    case Policy::Kind::kQuorum: return "QUORUM(" + frac() + ")";
    case Policy::Kind::kEachQuorum: return "EACH_QUORUM(" + frac() + ")";
    case Policy::Kind::kLocalOne: return "LOCAL_ONE(" + dc() + ")";
    case Policy::Kind::kLocalQuorum: return "LOCAL_QUORUM(" + frac() + "," + dc() + ")";
  }
  return "?";
}

bool complies(const Selection& g, const Policy& p, const ClusterConfig& cfg, RelationId i,
              FragmentIndex j) {
  const std::vector<NodeId> c = cfg.copies(i, j);
  const auto size = g.size();
  switch (p.kind) {
    case Policy::Kind::kAll: return g == c;
    case Policy::Kind::kOne: return size >= 1;
    case Policy::Kind::kTwo: return size >= 2;
    case Policy::Kind::kThree: return size >= 3;
    case Policy::Kind::kQuorum: return exceeds(p.q, c.size(), size);
    case Policy::Kind::kEachQuorum:
      for (DataCentreId d : cfg.relation(i).datacentres) {
        const auto in_d = static_cast<std::size_t>(
            std::count_if(g.begin(), g.end(), [d](const NodeId& n) { return n.dc == d; }));
        if (!exceeds(p.q, cfg.local_copies(i, j, d).size(), in_d)) return false;
      }
      return true;
    case Policy::Kind::kLocalOne: return all_in(g, p.dc) && size >= 1;
    case Policy::Kind::kLocalQuorum: return all_in(g, p.dc) && exceeds(p.q, c.size(), size);
  }
  return false;
}

CountState::CountState(const ClusterConfig& cfg, RelationId i)
    : totals_(cfg.relation(i).fragment_count(), 0),
      per_dc_(cfg.relation(i).fragment_count(),
              std::vector<std::uint32_t>(cfg.datacentres.size(), 0)) {}

void CountState::add(FragmentIndex j, DataCentreId d, std::uint32_t x) {
  if (j < 1 || j > totals_.size() || d >= per_dc_[j - 1].size()) {
    throw ConfigError("count update outside the relation's fragments or data centres");
  }
  totals_[j - 1] += x;
  per_dc_[j - 1][d] += x;
}

std::uint32_t CountState::count(FragmentIndex j) const { return totals_.at(j - 1); }

std::uint32_t CountState::count(FragmentIndex j, DataCentreId d) const {
  const auto& row = per_dc_.at(j - 1);
  return d < row.size() ? row[d] : 0;
}

std::uint32_t gamma(const ClusterConfig& cfg, RelationId i, FragmentIndex j) {
  return static_cast<std::uint32_t>(cfg.copies(i, j).size());
}

std::uint32_t delta(const ClusterConfig& cfg, RelationId i, FragmentIndex j, DataCentreId d) {
  return static_cast<std::uint32_t>(cfg.local_copies(i, j, d).size());
}

bool sufficient(const CountState& counts, const Policy& p, const ClusterConfig& cfg,
                RelationId i) {
  const RelationConfig& rel = cfg.relation(i);
  for (FragmentIndex j = 1; j <= rel.fragment_count(); ++j) {
    bool ok = false;
    switch (p.kind) {
      case Policy::Kind::kAll: ok = counts.count(j) == gamma(cfg, i, j); break;
      case Policy::Kind::kOne: ok = counts.count(j) >= 1; break;
      case Policy::Kind::kTwo: ok = counts.count(j) >= 2; break;
      case Policy::Kind::kThree: ok = counts.count(j) >= 3; break;
      case Policy::Kind::kQuorum: ok = exceeds(p.q, gamma(cfg, i, j), counts.count(j)); break;
      case Policy::Kind::kEachQuorum:
        ok = std::all_of(rel.datacentres.begin(), rel.datacentres.end(), [&](DataCentreId d) {
          return exceeds(p.q, delta(cfg, i, j, d), counts.count(j, d));
        });
        break;
      case Policy::Kind::kLocalQuorum:
        ok = exceeds(p.q, delta(cfg, i, j, p.dc), counts.count(j, p.dc));
        break;
      case Policy::Kind::kLocalOne: ok = counts.count(j, p.dc) >= 1; break;
    }
    if (!ok) return false;
  }
  return true;
}

bool is_appropriate(const Policy& read, const Policy& write) {
  if (write.kind == Policy::Kind::kAll || read.kind == Policy::Kind::kAll) return true;
  auto quorum_like = [](const Policy& p) {
    return p.kind == Policy::Kind::kQuorum || p.kind == Policy::Kind::kEachQuorum;
  };
  if (!quorum_like(read) || !quorum_like(write)) return false;
  // q + q' >= 1
  const i128 lhs = static_cast<i128>(write.q.num) * read.q.den +
                       static_cast<i128>(read.q.num) * write.q.den;
  return lhs >= static_cast<i128>(write.q.den) * read.q.den;
}

std::vector<Selection> enumerate_compliant_selections(const ClusterConfig& cfg, RelationId i,
                                                      FragmentIndex j, const Policy& p,
                                                      std::size_t bound) {
  const std::vector<NodeId> c = cfg.copies(i, j);
  std::vector<Selection> out;
  if (bound == 0) return out;
  const std::size_t n = c.size();
  for (std::size_t size = 0; size <= n; ++size) {
    // Lexicographic k-combinations of indices into c.
    std::vector<std::size_t> idx(size);
    for (std::size_t k = 0; k < size; ++k) idx[k] = k;
    while (true) {
      Selection g;
      g.reserve(size);
      for (std::size_t k : idx) g.push_back(c[k]);
      if (complies(g, p, cfg, i, j)) {
        out.push_back(std::move(g));
        if (out.size() == bound) return out;
      }
      std::size_t k = size;
      while (k > 0 && idx[k - 1] == n - size + k - 1) --k;
      if (k == 0) break;
      ++idx[k - 1];
      for (std::size_t m = k; m < size; ++m) idx[m] = idx[m - 1] + 1;
    }
  }
  return out;
}

}  // namespace replisim
