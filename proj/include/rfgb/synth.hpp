/*
 * Copyright 2026 The RFGB Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Synthetic job recommendation data with a planted matching rule.
//
// Users and jobs belong to classes; each draws skills mostly from its
// class's pool. A (user, job) pair matches iff they share at least
// `min_shared` true skills and the distance bucket is at most `max_bucket`
// (optionally also within `max_miles`). Only a fraction of the true skills
// is written out as userSkill / jobSkill facts, so the rule is not fully
// visible from a user's profile; past applications and similar users carry
// the rest.
//
// Recommendations are logged for matching pairs at `match_rec_rate`, for
// other pairs within `max_bucket` at `rec_rate` and for the rest at
// `far_rec_rate`, each scaled by a per-job popularity factor. A recommended
// matching pair becomes an application with probability 1 - apply_noise.

#ifndef RFGB_SYNTH_HPP_
#define RFGB_SYNTH_HPP_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numbers>

#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "rfgb/dataset.hpp"
#include "rfgb/hybrid.hpp"

namespace rfgb {

struct SynthConfig {
  int n_users = 500;
  int n_jobs = 2000;
  int n_skills = 60;
  int n_classes = 6;
  int n_cities = 12;
  int n_companies = 30;
  int n_titles = 24;
  int user_skills_min = 3;
  int user_skills_max = 8;
  int job_skills_min = 2;
  int job_skills_max = 4;
  int min_shared = 1;   // planted rule: shared true skills needed
  int max_bucket = 2;   // planted rule: farthest distance bucket
  double max_miles = 0;  // planted rule: optional extra cap in miles; 0 is off
  double rec_rate = 0.01;        // other pairs within max_bucket
  double far_rec_rate = 0.0005;  // other pairs beyond max_bucket
  double match_rec_rate = 0.1;
  double apply_noise = 0.1;
  double observed_skill_rate = 0.1;      // user skills written as facts
  double job_observed_skill_rate = 1.0;  // job skills written as facts
  double class_affinity = 0.85;  // chance a skill comes from the class pool
  double region_miles = 120;
  double popularity_skew = 1;  // log-normal sigma of per-job rate multipliers
  double test_fraction = 0.3;
  std::uint64_t seed = 0;

  void validate() const;
};

namespace detail {

struct SynthField {
  const char* key;
  int SynthConfig::*i = nullptr;
  double SynthConfig::*d = nullptr;
};

inline const std::vector<SynthField>& synth_fields() {
  static const std::vector<SynthField> fields = {
      {"n_users", &SynthConfig::n_users},
      {"n_jobs", &SynthConfig::n_jobs},
      {"n_skills", &SynthConfig::n_skills},
      {"n_classes", &SynthConfig::n_classes},
      {"n_cities", &SynthConfig::n_cities},
      {"n_companies", &SynthConfig::n_companies},
      {"n_titles", &SynthConfig::n_titles},
      {"user_skills_min", &SynthConfig::user_skills_min},
      {"user_skills_max", &SynthConfig::user_skills_max},
      {"job_skills_min", &SynthConfig::job_skills_min},
      {"job_skills_max", &SynthConfig::job_skills_max},
      {"min_shared", &SynthConfig::min_shared},
      {"max_bucket", &SynthConfig::max_bucket},
      {"rec_rate", nullptr, &SynthConfig::rec_rate},
      {"far_rec_rate", nullptr, &SynthConfig::far_rec_rate},
      {"match_rec_rate", nullptr, &SynthConfig::match_rec_rate},
      {"apply_noise", nullptr, &SynthConfig::apply_noise},
      {"observed_skill_rate", nullptr, &SynthConfig::observed_skill_rate},
      {"job_observed_skill_rate", nullptr, &SynthConfig::job_observed_skill_rate},
      {"class_affinity", nullptr, &SynthConfig::class_affinity},
      {"max_miles", nullptr, &SynthConfig::max_miles},
      {"region_miles", nullptr, &SynthConfig::region_miles},
      {"popularity_skew", nullptr, &SynthConfig::popularity_skew},
      {"test_fraction", nullptr, &SynthConfig::test_fraction},
  };
  return fields;
}

}  // namespace detail

inline void SynthConfig::validate() const {
  for (const auto& f : detail::synth_fields()) {
    if (f.i && this->*f.i < 0) throw ConfigError(std::string(f.key) + " must be nonnegative");
    if (f.d && !std::isfinite(this->*f.d)) throw ConfigError(std::string(f.key) + " must be finite");
  }
  for (int v : {n_users, n_jobs, n_skills, n_classes, n_cities, n_companies, n_titles}) {
    if (v < 1) throw ConfigError("entity counts must be >= 1");
  }
  if (n_users < 2) throw ConfigError("n_users must be >= 2 to split train and test");
  if (user_skills_min > user_skills_max || job_skills_min > job_skills_max) {
    throw ConfigError("skill count ranges must have min <= max");
  }
  if (user_skills_max > n_skills || job_skills_max > n_skills) {
    throw ConfigError("more skills per user or job than n_skills");
  }
  if (max_bucket < 1 || max_bucket > 4) throw ConfigError("max_bucket must be in 1..4");
  for (double p : {rec_rate, far_rec_rate, match_rec_rate, apply_noise, observed_skill_rate,
                   job_observed_skill_rate, class_affinity}) {
    if (p < 0 || p > 1) throw ConfigError("rates must be probabilities in [0, 1]");
  }
  if (!(max_miles >= 0)) throw ConfigError("max_miles must be nonnegative");
  if (!(popularity_skew >= 0)) throw ConfigError("popularity_skew must be nonnegative");
  if (!(test_fraction > 0 && test_fraction < 1)) throw ConfigError("test_fraction must be in (0, 1)");
  if (!(region_miles > 0)) throw ConfigError("region_miles must be positive");
}

inline void write_synth_config(std::ostream& out, const SynthConfig& c) {
  for (const auto& f : detail::synth_fields()) {
    out << f.key << '=';
    if (f.i) {
      out << c.*f.i;
    } else {
      out << text::format_double(c.*f.d);
    }
    out << '\n';
  }
  out << "seed=" << c.seed << '\n';
}

// key=value lines; unknown keys are errors, missing keys keep defaults.
inline SynthConfig parse_synth_config(std::istream& in) {
  SynthConfig c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto s = text::trim(text::strip_comment(line, '#'));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value", lineno);
    const auto key = text::trim(s.substr(0, eq));
    const auto value = text::trim(s.substr(eq + 1));
    if (key == "seed") {
      auto v = text::parse_int<std::uint64_t>(value);
      if (!v) throw ParseError("bad seed '" + std::string(value) + "'", lineno);
      c.seed = *v;
      continue;
    }
    bool known = false;
    for (const auto& f : detail::synth_fields()) {
      if (key != f.key) continue;
      known = true;
      if (f.i) {
        auto v = text::parse_int<int>(value);
        if (!v) throw ParseError("bad integer for " + std::string(key), lineno);
        c.*f.i = *v;
      } else {
        auto v = text::parse_double(value);
        if (!v) throw ParseError("bad number for " + std::string(key), lineno);
        c.*f.d = *v;
      }
    }
    if (!known) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + std::string(key) + "'");
  }
  c.validate();
  return c;
}

namespace detail {

// Fixed-algorithm helpers so datasets are identical across standard
// libraries (the std distributions are implementation-defined).
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  int below(int n) { return static_cast<int>(eng_() % static_cast<std::uint64_t>(n)); }
  int between(int lo, int hi) { return lo + below(hi - lo + 1); }
  bool chance(double p) { return uniform() < p; }

 private:
  std::mt19937_64 eng_;
};

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

using SkillSet = std::vector<std::uint64_t>;  // bitset over skills

inline int shared_count(const SkillSet& a, const SkillSet& b) {
  int n = 0;
  for (std::size_t w = 0; w < a.size(); ++w) n += std::popcount(a[w] & b[w]);
  return n;
}

// Distinct skills, each from the class pool with probability `affinity`.
inline std::vector<int> draw_skills(SynthRng& rng, const SynthConfig& c, int cls, int count) {
  std::vector<int> pool;
  for (int s = cls; s < c.n_skills; s += c.n_classes) pool.push_back(s);
  std::vector<int> out;
  std::vector<bool> taken(c.n_skills, false);
  while (static_cast<int>(out.size()) < count) {
    int s;
    const bool pool_left = std::any_of(pool.begin(), pool.end(), [&](int p) { return !taken[p]; });
    if (pool_left && rng.chance(c.class_affinity)) {
      s = pool[rng.below(static_cast<int>(pool.size()))];
    } else {
      s = rng.below(c.n_skills);
    }
    if (taken[s]) continue;
    taken[s] = true;
    out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

inline std::string synth_user(int i) { return "u" + std::to_string(i); }
inline std::string synth_job(int i) { return "j" + std::to_string(i); }

struct SynthWorld {
  struct Entity {
    int cls = 0;
    int city = 0;
    std::vector<int> skills;      // true skills
    std::vector<bool> observed;   // per true skill: written as a fact
    detail::SkillSet mask;
    double popularity = 1;        // jobs only: multiplier on recommendation rates
  };
  std::vector<Entity> users, jobs;
  std::vector<int> company, title;
  std::vector<std::pair<double, double>> city_xy;
  std::uint64_t seed = 0;

  // Miles: city-to-city distance plus a deterministic per-pair offset.
  double distance(int u, int j) const {
    const auto& a = city_xy[users[u].city];
    const auto& b = city_xy[jobs[j].city];
    const std::uint64_t key = (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(j);
    const double jitter = static_cast<double>(detail::mix64(seed ^ detail::mix64(key)) >> 11) *
                          0x1.0p-53 * 10.0;
    return std::hypot(a.first - b.first, a.second - b.second) + jitter;
  }
};

inline SynthWorld synth_world(const SynthConfig& c) {
  detail::SynthRng rng(c.seed);
  SynthWorld w;
  w.seed = c.seed;
  for (int i = 0; i < c.n_cities; ++i) {
    const double x = rng.uniform() * c.region_miles;
    const double y = rng.uniform() * c.region_miles;
    w.city_xy.emplace_back(x, y);
  }
  const std::size_t words = (static_cast<std::size_t>(c.n_skills) + 63) / 64;
  const auto entity = [&](int lo, int hi, double observed_rate) {
    SynthWorld::Entity e;
    e.cls = rng.below(c.n_classes);
    e.city = rng.below(c.n_cities);
    e.skills = detail::draw_skills(rng, c, e.cls, rng.between(lo, hi));
    e.mask.assign(words, 0);
    for (int s : e.skills) {
      e.mask[s / 64] |= std::uint64_t{1} << (s % 64);
      e.observed.push_back(rng.chance(observed_rate));
    }
    return e;
  };
  const int per_class_company = std::max(1, c.n_companies / c.n_classes);
  const int per_class_title = std::max(1, c.n_titles / c.n_classes);
  for (int u = 0; u < c.n_users; ++u) {
    w.users.push_back(entity(c.user_skills_min, c.user_skills_max, c.observed_skill_rate));
    const int cls = w.users.back().cls;
    w.company.push_back((cls + c.n_classes * rng.below(per_class_company)) % c.n_companies);
    w.title.push_back((cls + c.n_classes * rng.below(per_class_title)) % c.n_titles);
  }
  for (int j = 0; j < c.n_jobs; ++j) {
    w.jobs.push_back(entity(c.job_skills_min, c.job_skills_max, c.job_observed_skill_rate));
  }
  if (c.popularity_skew > 0) {
    const double sigma = c.popularity_skew;
    for (auto& job : w.jobs) {
      // Box-Muller; mean-one log-normal
      const double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
      const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
      job.popularity = std::exp(sigma * z - 0.5 * sigma * sigma);
    }
  }
  return w;
}

inline bool synth_matches(const SynthConfig& c, const SynthWorld& w, int u, int j) {
  const double miles = w.distance(u, j);
  return detail::shared_count(w.users[u].mask, w.jobs[j].mask) >= c.min_shared &&
         rec::discretize_distance(miles) <= c.max_bucket && (c.max_miles <= 0 || miles <= c.max_miles);
}

// Users are split into train and test. The training fact base holds the
// jobs and the training users. The test fact base additionally holds every
// training user's profile and applications as background evidence, plus
// the test users' own logs; its examples are the test users' pairs only.
inline DatasetSplit synth_generate(const SynthConfig& c) {
  c.validate();
  const SynthWorld w = synth_world(c);
  detail::SynthRng rng(detail::mix64(c.seed + 1));

  std::vector<int> order(c.n_users);
  for (int u = 0; u < c.n_users; ++u) order[u] = u;
  for (int i = c.n_users - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  int n_test = static_cast<int>(std::lround(c.test_fraction * c.n_users));
  n_test = std::clamp(n_test, 1, c.n_users - 1);
  std::vector<bool> is_test(c.n_users, false);
  for (int i = 0; i < n_test; ++i) is_test[order[i]] = true;

  // Recommendation and application logs, in (user, job) order.
  struct Logged {
    int u, j, bucket;
    bool applied;
  };
  std::vector<Logged> log;
  for (int u = 0; u < c.n_users; ++u) {
    for (int j = 0; j < c.n_jobs; ++j) {
      const int bucket = rec::discretize_distance(w.distance(u, j));
      const bool near = bucket <= c.max_bucket;
      const bool match = synth_matches(c, w, u, j);
      const double rate = match ? c.match_rec_rate : near ? c.rec_rate : c.far_rec_rate;
      if (!rng.chance(std::min(1.0, rate * w.jobs[j].popularity))) continue;
      const bool applied = match && !rng.chance(c.apply_noise);
      log.push_back({u, j, bucket, applied});
    }
  }

  DatasetSplit d;
  d.vocab = rec::make_vocabulary();
  auto& v = *d.vocab;
  // Intern in a fixed order so constant ids do not depend on fact order.
  for (int u = 0; u < c.n_users; ++u) v.intern(synth_user(u), v.type_id("user"));
  for (int j = 0; j < c.n_jobs; ++j) v.intern(synth_job(j), v.type_id("job"));
  FactBase train(d.vocab), test(d.vocab);

  const auto add = [](FactBase& fb, std::string_view pred, std::initializer_list<std::string> args) {
    fb.add_fact(pred, args);
  };
  const auto skill = [](int s) { return "s" + std::to_string(s); };
  for (FactBase* fb : {&train, &test}) {
    for (int j = 0; j < c.n_jobs; ++j) {
      const auto& job = w.jobs[j];
      for (std::size_t k = 0; k < job.skills.size(); ++k) {
        if (job.observed[k]) add(*fb, "jobSkill", {synth_job(j), skill(job.skills[k])});
      }
      add(*fb, "jobClass", {synth_job(j), "k" + std::to_string(job.cls)});
    }
  }
  for (int u = 0; u < c.n_users; ++u) {
    const auto& user = w.users[u];
    for (FactBase* fb : {&train, &test}) {
      if (fb == &train && is_test[u]) continue;
      for (std::size_t k = 0; k < user.skills.size(); ++k) {
        if (user.observed[k]) add(*fb, "userSkill", {synth_user(u), skill(user.skills[k])});
      }
      add(*fb, "userClass", {synth_user(u), "k" + std::to_string(user.cls)});
      add(*fb, "userCity", {synth_user(u), "c" + std::to_string(user.city)});
      add(*fb, "mostRecentCompany", {synth_user(u), "co" + std::to_string(w.company[u])});
      add(*fb, "mostRecentJobTitle", {synth_user(u), "t" + std::to_string(w.title[u])});
    }
  }
  for (const auto& e : log) {
    const std::string u = synth_user(e.u), j = synth_job(e.j);
    if (!is_test[e.u] && e.applied) add(test, rec::kApplied, {u, j});
    FactBase& fb = is_test[e.u] ? test : train;
    add(fb, rec::kRecommended, {u, j});
    add(fb, "userJobDis", {u, j, std::to_string(e.bucket)});
    if (e.applied) add(fb, rec::kApplied, {u, j});
    if (is_test[e.u]) {
      auto& out = e.applied ? d.test_pos : d.test_neg;
      out.push_back({make_atom(v, rec::kTarget, {u, j}), e.applied ? kMatch : kMisMatch});
    }
  }

  d.fb_train = std::make_unique<FactBase>(rec::induce_comm(train));
  d.fb_train->freeze();
  auto ex = rec::build_examples(*d.fb_train);
  d.train_pos = std::move(ex.pos);
  d.train_neg = std::move(ex.neg);
  d.fb_test = std::make_unique<FactBase>(rec::induce_comm(test));
  d.fb_test->freeze();
  return d;
}

inline void write_synth_dataset(const fs::path& dir, const DatasetSplit& d, const SynthConfig& c) {
  write_dataset(dir, d);
  write_with(dir / "synth_config.txt", [&](std::ostream& o) { write_synth_config(o, c); });
}

}  // namespace rfgb

#endif  // RFGB_SYNTH_HPP_
