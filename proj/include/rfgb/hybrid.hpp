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

// Job recommendation domain: the relational schema, collaborative comm*
// predicates, example construction from application and recommendation
// logs, and the content / hybrid mode presets.

#ifndef RFGB_HYBRID_HPP_
#define RFGB_HYBRID_HPP_

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rfgb/boost.hpp"
#include "rfgb/factstore.hpp"
#include "rfgb/modes.hpp"

namespace rfgb::rec {

inline constexpr std::string_view kSchemaText = R"(type user.
type job.
type skill.
type class.
type city.
type company.
type title.
type distbucket.
pred match(user, job).
pred jobSkill(job, skill).
pred userSkill(user, skill).
pred jobClass(job, class).
pred userClass(user, class).
pred prAppliedJob(user, job).
pred userJobDis(user, job, distbucket).
pred userCity(user, city).
pred mostRecentCompany(user, company).
pred mostRecentJobTitle(user, title).
pred commSkill(user, user).
pred commClass(user, user).
pred commCity(user, user).
pred recommended(user, job).
)";

inline constexpr std::string_view kTarget = "match";
inline constexpr std::string_view kApplied = "prAppliedJob";
inline constexpr std::string_view kRecommended = "recommended";

inline void declare_schema(Vocabulary& vocab) {
  std::istringstream in{std::string(kSchemaText)};
  parse_schema(in, vocab);
}

inline std::shared_ptr<Vocabulary> make_vocabulary() {
  auto v = std::make_shared<Vocabulary>();
  declare_schema(*v);
  return v;
}

// (attribute predicate, induced comm predicate)
inline constexpr std::pair<std::string_view, std::string_view> kCommSources[] = {
    {"userSkill", "commSkill"}, {"userClass", "commClass"}, {"userCity", "commCity"}};

// Copy of `fb` (unfrozen) with commX(u1, u2) for every pair of distinct
// users sharing a value of the corresponding attribute, in both orders.
inline FactBase induce_comm(const FactBase& fb) {
  FactBase out = fb.thawed_copy();
  const auto& vocab = fb.vocab();
  for (const auto& [attr_name, comm_name] : kCommSources) {
    const PredId attr = vocab.predicate_id(attr_name);
    const PredId comm = vocab.predicate_id(comm_name);
    // value -> users holding it
    std::vector<std::pair<ConstId, ConstId>> by_value;
    fb.for_each_row(attr, [&](std::span<const ConstId> r) { by_value.emplace_back(r[1], r[0]); });
    std::sort(by_value.begin(), by_value.end());
    by_value.erase(std::unique(by_value.begin(), by_value.end()), by_value.end());
    std::vector<std::pair<ConstId, ConstId>> pairs;
    for (std::size_t lo = 0; lo < by_value.size();) {
      std::size_t hi = lo;
      while (hi < by_value.size() && by_value[hi].first == by_value[lo].first) ++hi;
      for (std::size_t a = lo; a < hi; ++a) {
        for (std::size_t b = lo; b < hi; ++b) {
          if (a != b) pairs.emplace_back(by_value[a].second, by_value[b].second);
        }
      }
      lo = hi;
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    for (const auto& [u1, u2] : pairs) out.add_fact(GroundAtom{comm, {u1, u2}});
  }
  return out;
}

// Distance bucket: 1 below 15 miles, 2 in [15, 30), 3 in [30, 60], 4 above.
inline int discretize_distance(double miles) {
  if (!(miles >= 0)) throw std::domain_error("distance must be a nonnegative number");
  if (miles < 15) return 1;
  if (miles < 30) return 2;
  if (miles <= 60) return 3;
  return 4;
}

inline LabeledExample make_example(const Vocabulary& vocab, ConstId user, ConstId job, int label) {
  return {GroundAtom{vocab.predicate_id(kTarget), {user, job}}, label};
}

// One MisMatch example per recommended(u, j) without prAppliedJob(u, j).
inline std::vector<LabeledExample> generate_negatives(const FactBase& fb) {
  const auto& vocab = fb.vocab();
  const PredId rec = vocab.predicate_id(kRecommended);
  const PredId applied = vocab.predicate_id(kApplied);
  std::vector<LabeledExample> out;
  fb.for_each_row(rec, [&](std::span<const ConstId> r) {
    if (!fb.contains(applied, r)) out.push_back(make_example(vocab, r[0], r[1], kMisMatch));
  });
  return out;
}

struct Examples {
  std::vector<LabeledExample> pos;
  std::vector<LabeledExample> neg;
};

// Positives are the applications; negatives come from generate_negatives.
// Training and scoring should mask each example's own application fact
// (TrainConfig::mask_predicate = kApplied).
inline Examples build_examples(const FactBase& fb) {
  const auto& vocab = fb.vocab();
  Examples ex;
  fb.for_each_row(vocab.predicate_id(kApplied), [&](std::span<const ConstId> r) {
    ex.pos.push_back(make_example(vocab, r[0], r[1], kMatch));
  });
  ex.neg = generate_negatives(fb);
  return ex;
}

inline constexpr std::string_view kContentModes = R"(mode jobSkill(+job, -skill).
mode userSkill(+user, -skill).
mode jobClass(+job, -class).
mode jobClass(+job, #class).
mode userClass(+user, -class).
mode userClass(+user, #class).
mode userJobDis(+user, +job, #distbucket).
mode userCity(+user, #city).
mode mostRecentCompany(+user, #company).
mode mostRecentJobTitle(+user, #title).
)";

inline constexpr std::string_view kCollaborativeModes = R"(mode prAppliedJob(+user, -job).
mode commSkill(+user, -user).
mode commClass(+user, -user).
mode commCity(+user, -user).
)";

inline std::string mode_preset_text(std::string_view kind) {
  if (kind == "content") return std::string(kContentModes);
  if (kind == "hybrid") return std::string(kContentModes) + std::string(kCollaborativeModes);
  throw ConfigError("unknown mode preset '" + std::string(kind) + "' (expected content or hybrid)");
}

inline std::vector<ModeDecl> mode_preset(std::string_view kind, const Vocabulary& vocab) {
  std::istringstream in(mode_preset_text(kind));
  return parse_modes(in, vocab);
}

}  // namespace rfgb::rec

#endif  // RFGB_HYBRID_HPP_
