#pragma once

#include <random>
#include <sstream>

#include "oracles/oracles.hpp"
#include "pp/needgraph.hpp"
#include "pp/params.hpp"
#include "support/check.hpp"

namespace testsupport {

struct RandomDate {
  pp::Date date;
  long jdn = 0;
};

inline RandomDate random_date(std::mt19937_64& rng, int y0, int y1) {
  std::uniform_int_distribution<int> y(y0, y1), m(1, 12), d(1, 28);
  const int yy = y(rng), mm = m(rng), dd = d(rng);
  return {pp::Date(yy, static_cast<unsigned>(mm), static_cast<unsigned>(dd)), oracle::jdn(yy, mm, dd)};
}

inline std::string show(double got, double want) {
  std::ostringstream os;
  os.precision(17);
  os << got << " vs oracle " << want;
  return os.str();
}

// Every params formula against the reference implementations on `n` random
// inputs each, relative tolerance `tol`.
inline Tally formula_suite(std::uint64_t seed, int n = 25, double tol = 1e-9) {
  using namespace pp;
  using namespace pp::params;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tally t;
  const ParamConfig cfg;

  for (int i = 0; i < n; ++i) {
    const auto eval = random_date(rng, 2020, 2030);
    const auto expiry = random_date(rng, 2031, 2045);
    corpus::PatentRecord p;
    p.expiry_date = expiry.date;
    const double got = remaining_life(p, eval.date);
    const double want = oracle::remaining_life(expiry.jdn, eval.jdn);
    t.check(oracle::close(got, want, tol), "remaining_life " + show(got, want));
  }

  for (int i = 0; i < n; ++i) {
    const auto filing = random_date(rng, 2000, 2010);
    const auto grant = random_date(rng, 2011, 2018);
    const auto eval = random_date(rng, 2019, 2026);
    corpus::PatentRecord p;
    p.filing_date = filing.date;
    p.grant_date = grant.date;
    std::vector<long> cites;
    const int k = static_cast<int>(u(rng) * 30);
    for (int c = 0; c < k; ++c) {
      const auto cd = random_date(rng, 2012, 2026);
      p.forward_citations.push_back({"X" + std::to_string(c), cd.date});
      cites.push_back(cd.jdn);
    }
    double got = citation_velocity(p, eval.date, cfg);
    double want = oracle::citation_velocity(cites, grant.jdn, eval.jdn, 3.0, 0.25);
    t.check(oracle::close(got, want, tol), "citation_velocity " + show(got, want));
    got = pendency_months(p);
    want = oracle::pendency_months(filing.jdn, grant.jdn);
    t.check(oracle::close(got, want, tol), "pendency_months " + show(got, want));
  }

  for (int i = 0; i < n; ++i) {
    const double s = 0.1 + 1e6 * u(rng), e = 1e6 * u(rng), years = 0.5 + 20 * u(rng);
    const double got = cagr(s, e, years), want = oracle::cagr(s, e, years);
    t.check(oracle::close(got, want, tol), "cagr " + show(got, want));
  }

  for (int i = 0; i < n; ++i) {
    const double h = 80 * u(rng), c = 1.0 + 200 * u(rng), l = u(rng);
    const double got = inventor_score(h, c, l, cfg), want = oracle::inventor(h, c, l, 0.5, 0.3, 0.2);
    t.check(oracle::close(got, want, tol), "inventor_score " + show(got, want));
  }

  for (int i = 0; i < n; ++i) {
    const int a = static_cast<int>(u(rng) * 6), b = static_cast<int>(u(rng) * 6), c = static_cast<int>(u(rng) * 6);
    const double got = rejection_score(a, b, c, cfg), want = oracle::rejection(a, b, c);
    t.check(oracle::close(got, want, tol), "rejection_score " + show(got, want));
  }

  const std::vector<std::string> countries = {"USA", "CHN", "JPN", "KOR", "DEU", "GBR"};
  for (int i = 0; i < n; ++i) {
    GniTable gni;
    std::map<std::string, double> raw;
    for (const auto& c : countries) raw[c] = gni.gni_usd[c] = 1e11 + 3e13 * u(rng);
    std::vector<corpus::Jurisdiction> js;
    std::vector<oracle::Country> oc;
    for (const auto& c : countries) {
      if (u(rng) < 0.4) continue;
      const bool granted = u(rng) < 0.5;
      js.push_back({c, granted ? corpus::JurisdictionStatus::Granted : corpus::JurisdictionStatus::Pending});
      oc.push_back({raw[c], granted});
    }
    const double got = jurisdiction_score(js, gni, cfg), want = oracle::jurisdiction(oc, raw["USA"]);
    t.check(oracle::close(got, want, tol), "jurisdiction_score " + show(got, want));
  }

  for (int i = 0; i < n; ++i) {
    const double a = u(rng), b = u(rng), c = u(rng);
    const double got = supply_chain_score(a, b, c, cfg), want = oracle::supply_chain(a, b, c);
    t.check(oracle::close(got, want, tol), "supply_chain_score " + show(got, want));
  }

  for (int i = 0; i < n; ++i) {
    const double s = i == 0 ? 0.0 : std::pow(10.0, 12 * u(rng) - 6), noise = std::pow(10.0, 4 * u(rng) - 2);
    const double got = demand_snr(s, noise, cfg), want = oracle::demand_snr(s, noise, -60.0);
    t.check(oracle::close(got, want, tol), "demand_snr " + show(got, want));
  }

  for (int i = 0; i < n; ++i) {
    std::map<std::string, double> counts;
    for (const char* k : {"JointVenture", "Licensing", "MoU"}) {
      if (u(rng) < 0.7) counts[k] = std::floor(10 * u(rng));
    }
    const double got = partnership_score(counts, cfg), want = oracle::partnership(counts);
    t.check(oracle::close(got, want, tol), "partnership_score " + show(got, want));
  }

  for (int i = 0; i < n; ++i) {
    const double v = 1e10 * u(rng), d = std::floor(20 * u(rng));
    const double got = ma_score(v, d, cfg), want = oracle::ma(v, d);
    t.check(oracle::close(got, want, tol), "ma_score " + show(got, want));
  }

  for (int i = 0; i < n; ++i) {
    std::vector<corpus::LitigationEvent> evs;
    std::vector<std::pair<oracle::Outcome, double>> oevs;
    const int k = static_cast<int>(u(rng) * 5);
    for (int e = 0; e < k; ++e) {
      const int o = static_cast<int>(u(rng) * 3);
      const double v = 1e8 * u(rng);
      evs.push_back({static_cast<corpus::LitigationOutcome>(o), v});
      oevs.push_back({static_cast<oracle::Outcome>(o), v});
    }
    const double got = litigation_score(evs, cfg), want = oracle::litigation(oevs);
    t.check(oracle::close(got, want, tol), "litigation_score " + show(got, want));
  }

  // Claim-type score: best weight among independent claims, built from known
  // preamble nouns.
  const std::vector<std::pair<std::string, double>> heads = {
      {"An apparatus", 1.0}, {"A system", 1.0}, {"A method", 0.7}, {"A process", 0.7}, {"A composition", 0.5}};
  for (int i = 0; i < n; ++i) {
    std::vector<corpus::ClaimText> claims;
    double want = 0.0;
    const int k = 1 + static_cast<int>(u(rng) * 4);
    for (int c = 0; c < k; ++c) {
      const auto& [head, w] = heads[static_cast<std::size_t>(u(rng) * heads.size())];
      const bool dependent = c > 0 && u(rng) < 0.5;
      if (dependent) {
        claims.push_back({c + 1, "The apparatus of claim 1, wherein the gate is open."});
      } else {
        claims.push_back({c + 1, head + " comprising: a first part; and a second part."});
        want = std::max(want, w);
      }
    }
    const double got = claim_type_score(claims, cfg);
    t.check(oracle::close(got, want, tol), "claim_type_score " + show(got, want));
  }

  // Constants the formulas are anchored to.
  t.check(cfg.w102 == 1.0 && cfg.w103 == 0.6 && cfg.w112 == 0.2, "rejection weights 1.0/0.6/0.2");
  t.check(cfg.claim_product == 1.0 && cfg.claim_process == 0.7, "claim scores 1.0/0.7");
  t.check(cfg.juris_pending == 0.7 && cfg.juris_granted == 1.0, "pending factor 0.7");
  t.check(needgraph::authority_of(needgraph::SourceType::RegulatoryFiling) == 1.0 &&
              needgraph::authority_of(needgraph::SourceType::Blog) == 0.4,
          "authority 1.0/0.4");
  return t;
}

}  // namespace testsupport
