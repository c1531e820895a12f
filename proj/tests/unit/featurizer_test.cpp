#include <gtest/gtest.h>

#include <set>

#include "dqfd/featurizer.hpp"
#include "support.hpp"

namespace dqfd {
namespace {

// Hand-derived offsets for the desk ontology.
//   hotel       area 0-3, price 4-7, stars 8-11, requested 12-17, db 18-21,
//               offered 22, booked 23, booking-requested 24, active 25
//   restaurant  food 26-30, area 31-34, price 35-38, requested 39-44,
//               db 45-48, offered 49, booked 50, booking-requested 51, active 52
//   taxi        leave 53-56, destination 57-60, offered 61, booked 62,
//               booking-requested 63, active 64
//   intents 65-72, terminal 73, turn 74-79
constexpr std::size_t kHotelAreaNorth = 0;
constexpr std::size_t kHotelDb = 18;
constexpr std::size_t kHotelActive = 25;
constexpr std::size_t kRestaurantDb = 45;
constexpr std::size_t kIntents = 65;
constexpr std::size_t kTurn = 74;
constexpr std::size_t kLength = 80;

std::set<std::size_t> ones(const FeatureVector& x) {
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i]) out.insert(i);
  return out;
}

TEST(Featurizer, DeskLayoutLength) {
  const FeatureLayout layout(test::desk_ontology());
  EXPECT_EQ(layout.size(), kLength);
  EXPECT_EQ(FeatureLayout::formula_size(test::desk_ontology()), kLength);
  EXPECT_EQ(layout.domain(0).db_bucket, kHotelDb);
  EXPECT_EQ(layout.domain(1).db_bucket, kRestaurantDb);
  EXPECT_EQ(layout.intent_offset(), kIntents);
  EXPECT_EQ(layout.turn_offset(), kTurn);
}

TEST(Featurizer, InitialState) {
  const auto db = test::desk_db();
  const auto x = featurize(initial_state(*db), db->ontology());
  ASSERT_EQ(x.size(), kLength);
  // 12 entities per database domain land in the ">= 5" bucket.
  EXPECT_EQ(ones(x), (std::set<std::size_t>{kHotelDb + 3, kRestaurantDb + 3, kTurn}));
}

TEST(Featurizer, SingleInformPositions) {
  const auto db = test::desk_db();
  const auto s = track_state(initial_state(*db),
                             std::vector{make_inform("hotel", "area", "north")}, *db);
  const auto x = featurize(s, db->ontology());
  const auto count = db->query("hotel", {{"area", "north"}}).size();
  const std::size_t bucket = count == 0 ? 0 : count == 1 ? 1 : count <= 4 ? 2 : 3;
  EXPECT_EQ(ones(x), (std::set<std::size_t>{kHotelAreaNorth, kHotelDb + bucket, kHotelActive,
                                            kRestaurantDb + 3, kIntents + 0, kTurn}));
}

TEST(Featurizer, Buckets) {
  EXPECT_EQ(db_bucket(0), 0u);
  EXPECT_EQ(db_bucket(1), 1u);
  EXPECT_EQ(db_bucket(2), 2u);
  EXPECT_EQ(db_bucket(4), 2u);
  EXPECT_EQ(db_bucket(5), 3u);
  EXPECT_EQ(turn_bucket(0), 0u);
  EXPECT_EQ(turn_bucket(2), 1u);
  EXPECT_EQ(turn_bucket(3), 2u);
  EXPECT_EQ(turn_bucket(10), 3u);
  EXPECT_EQ(turn_bucket(20), 4u);
  EXPECT_EQ(turn_bucket(21), 5u);
  EXPECT_EQ(turn_bucket(40), 5u);
}

TEST(Featurizer, PureFunction) {
  const auto db = test::desk_db();
  const auto s = track_state(initial_state(*db),
                             std::vector{make_request("restaurant", "phone")}, *db);
  EXPECT_EQ(featurize(s, db->ontology()), featurize(s, db->ontology()));
}

TEST(Featurizer, SingleFieldChangesAreVisible) {
  const auto db = test::desk_db();
  const auto& o = db->ontology();
  const DialogState base = initial_state(*db);

  std::vector<DialogState> states{base};
  for (std::size_t d = 0; d < o.domains.size(); ++d) {
    const auto& spec = o.domains[d];
    for (const auto& slot : spec.informable) {
      for (const auto& v : slot.values) {
        auto s = base;
        s.domains[d].constraints[slot.name] = v;
        states.push_back(s);
      }
      auto s = base;
      s.domains[d].constraints[slot.name] = "dontcare";
      states.push_back(s);
    }
    for (const auto& r : spec.requestable) {
      auto s = base;
      s.domains[d].requested.insert(r);
      states.push_back(s);
    }
    if (spec.has_database) {
      for (int c : {0, 1, 2}) {
        auto s = base;
        s.domains[d].db_count = c;
        states.push_back(s);
      }
    }
    auto offered = base;
    offered.domains[d].offered_entity = 0;
    auto booked = base;
    booked.domains[d].booked = true;
    auto wants = base;
    wants.domains[d].booking_requested = true;
    auto active = base;
    active.active_domain = d;
    states.insert(states.end(), {offered, booked, wants, active});
  }
  for (std::size_t i = 0; i < kIntentCount; ++i) {
    auto s = base;
    DialogAct act;
    act.intent = static_cast<Intent>(i);
    s.last_user_acts = {act};
    states.push_back(s);
  }
  auto terminal = base;
  terminal.terminated = true;
  states.push_back(terminal);
  for (int t : {1, 3, 6, 11, 21}) {
    auto s = base;
    s.turn = t;
    states.push_back(s);
  }

  std::set<FeatureVector> seen;
  for (const auto& s : states) EXPECT_TRUE(seen.insert(featurize(s, o)).second);
  EXPECT_EQ(seen.size(), states.size());
}

TEST(Featurizer, LengthFollowsOntology) {
  const auto o = load_ontology("[a]\ninform.x = 1, 2\nrequest = p\n");
  // x: 3, p: 1, flags: 4, intents 8, terminal 1, turn 6
  EXPECT_EQ(FeatureLayout(o).size(), 3u + 1 + 4 + 8 + 1 + 6);
}

}  // namespace
}  // namespace dqfd
