#include "grain/hierarchy.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>

#include "grain/errors.hpp"

using grain::CoarseRestriction;
using grain::LabelHierarchy;
using grain::PartitionAssignment;

namespace {

// Two coarse groups of two; the workhorse fixture.
LabelHierarchy small() {
  return LabelHierarchy({"a0", "a1", "b0", "b1"}, {"A", "B"}, {0, 0, 1, 1});
}

std::filesystem::path fixture(const char* name) {
  return std::filesystem::path(GRAIN_SOURCE_DIR) / "data" / "hierarchies" / name;
}

}  // namespace

TEST_CASE("construction validates structure") {
  CHECK_NOTHROW(small());
  // mapping length must equal fine count
  CHECK_THROWS_AS(LabelHierarchy({"x", "y"}, {"A"}, {0}), grain::Error);
  // parent index out of range
  CHECK_THROWS_AS(LabelHierarchy({"x", "y"}, {"A"}, {0, 1}), grain::Error);
  CHECK_THROWS_AS(LabelHierarchy({"x", "y"}, {"A"}, {0, -1}), grain::Error);
  // empty levels
  CHECK_THROWS_AS(LabelHierarchy({}, {"A"}, {}), grain::Error);
  CHECK_THROWS_AS(LabelHierarchy({"x"}, {}, {0}), grain::Error);
  // coarse class with no fine classes
  CHECK_THROWS_AS(LabelHierarchy({"x", "y"}, {"A", "B"}, {0, 0}), grain::Error);
  // duplicate names at either level
  CHECK_THROWS_AS(LabelHierarchy({"x", "x"}, {"A"}, {0, 0}), grain::Error);
  CHECK_THROWS_AS(LabelHierarchy({"x", "y"}, {"A", "A"}, {0, 1}), grain::Error);
  // empty names
  CHECK_THROWS_AS(LabelHierarchy({"", "y"}, {"A"}, {0, 0}), grain::Error);
  CHECK_THROWS_AS(LabelHierarchy({"x", "y"}, {""}, {0, 0}), grain::Error);
}

TEST_CASE("lookups behave and fail loudly") {
  const LabelHierarchy h = small();
  CHECK(h.fine_count() == 4);
  CHECK(h.coarse_count() == 2);
  CHECK(h.coarse_of(0) == 0);
  CHECK(h.coarse_of(3) == 1);
  CHECK_THROWS_AS(h.coarse_of(4), std::out_of_range);
  CHECK_THROWS_AS(h.coarse_of(-1), std::out_of_range);
  CHECK(h.same_coarse(0, 1));
  CHECK_FALSE(h.same_coarse(1, 2));
  CHECK(h.fine_ids_of(0) == std::vector<int>{0, 1});
  CHECK(h.fine_ids_of(1) == std::vector<int>{2, 3});
  CHECK(h.fine_id("b0") == 2);
  CHECK_THROWS_WITH_AS(h.fine_id("nope"),
                       "hierarchy: unknown fine class name 'nope'", grain::Error);
}

TEST_CASE("json round trip preserves ids and names") {
  const LabelHierarchy h = small();
  const std::string text = hierarchy_to_json(h);
  const LabelHierarchy back = grain::load_hierarchy(text);
  CHECK(back.fine_names() == h.fine_names());
  CHECK(back.coarse_names() == h.coarse_names());
  CHECK(back.fine_to_coarse() == h.fine_to_coarse());
  CHECK(hierarchy_to_json(back) == text);
}

TEST_CASE("loader rejects malformed documents") {
  CHECK_THROWS_AS(grain::load_hierarchy("not json"), grain::Error);
  CHECK_THROWS_AS(grain::load_hierarchy("{}"), grain::Error);
  CHECK_THROWS_AS(grain::load_hierarchy(R"({"coarse": ["A"], "fine": [
    {"name": "x", "coarse": "B"}]})"),
                  grain::Error);  // unknown parent
  CHECK_THROWS_AS(grain::load_hierarchy(R"({"coarse": ["A"], "fine": [
    {"name": "x", "coarse": "A"}, {"name": "x", "coarse": "A"}]})"),
                  grain::Error);  // duplicate fine name
}

TEST_CASE("shipped fixtures match the published class settings") {
  const LabelHierarchy c10 = grain::load_hierarchy_file(fixture("cifar10.json"));
  CHECK(c10.fine_count() == 10);
  CHECK(c10.coarse_count() == 2);
  CHECK(c10.coarse_names() == std::vector<std::string>{"animal", "vehicle"});
  // canonical fine order: plane car bird cat deer dog frog horse ship truck
  CHECK(c10.fine_names().front() == "plane");
  CHECK(c10.fine_id("bird") == 2);
  CHECK(c10.coarse_of(c10.fine_id("plane")) == 1);
  CHECK(c10.coarse_of(c10.fine_id("horse")) == 0);
  CHECK(c10.fine_ids_of(0).size() == 6);   // six animals
  CHECK(c10.fine_ids_of(1).size() == 4);   // four vehicles

  const LabelHierarchy c100 = grain::load_hierarchy_file(fixture("cifar100.json"));
  CHECK(c100.fine_count() == 100);
  CHECK(c100.coarse_count() == 20);
  for (int c = 0; c < 20; ++c) {
    CHECK(c100.fine_ids_of(c).size() == 5);  // five fine classes per group
  }
  CHECK(c100.coarse_names()[c100.coarse_of(c100.fine_id("maple tree"))] == "trees");
  CHECK(c100.coarse_names()[c100.coarse_of(c100.fine_id("whale"))] == "aquatic mammals");
  CHECK(c100.coarse_names()[c100.coarse_of(c100.fine_id("rocket"))] == "vehicles 2");

  const LabelHierarchy animals =
      grain::load_hierarchy_file(fixture("cifar100-animals.json"));
  CHECK(animals.fine_count() == 50);
  CHECK(animals.coarse_count() == 10);
  // the animals subset has people but no flowers
  CHECK_NOTHROW(animals.fine_id("baby"));
  CHECK_THROWS_AS(animals.fine_id("orchid"), grain::Error);

  const LabelHierarchy dogcat =
      grain::load_hierarchy_file(fixture("imagenet-dogcat.json"));
  CHECK(dogcat.fine_count() == 10);
  CHECK(dogcat.coarse_count() == 2);
  CHECK(dogcat.coarse_names()[dogcat.coarse_of(dogcat.fine_id("basset"))] == "dog");
  CHECK(dogcat.coarse_names()[dogcat.coarse_of(dogcat.fine_id("Siamese"))] == "cat");

  const LabelHierarchy fv =
      grain::load_hierarchy_file(fixture("imagenet-fruitvege.json"));
  CHECK(fv.fine_count() == 17);
  CHECK(fv.coarse_count() == 2);
  CHECK(fv.fine_ids_of(0).size() == 8);  // fruit
  CHECK(fv.fine_ids_of(1).size() == 9);  // vege
}

TEST_CASE("repartition regroups without touching fine classes") {
  const LabelHierarchy c10 = grain::load_hierarchy_file(fixture("cifar10.json"));
  // first row of the shipped binary partitions: vehicles=0, animals=1
  const PartitionAssignment p{{0, 0, 1, 1, 1, 1, 1, 1, 0, 0}};
  const LabelHierarchy h = repartition(c10, p, {"g0", "g1"});
  CHECK(h.fine_names() == c10.fine_names());
  CHECK(h.coarse_count() == 2);
  CHECK(h.fine_ids_of(0).size() == 4);
  CHECK(h.fine_ids_of(1).size() == 6);
  CHECK(h.coarse_of(h.fine_id("plane")) == 0);
  CHECK(h.coarse_of(h.fine_id("bird")) == 1);

  // bad assignments are rejected
  CHECK_THROWS_AS(repartition(c10, PartitionAssignment{{0, 0}}, {"g0"}), grain::Error);
  CHECK_THROWS_AS(repartition(c10, p, {"g0"}), grain::Error);  // id 1 out of range
  // a named coarse class that no fine class uses
  CHECK_THROWS_AS(repartition(c10, PartitionAssignment{{0, 0, 0, 0, 0, 0, 0, 0, 0, 0}},
                              {"g0", "g1"}),
                  grain::Error);
}

TEST_CASE("restrict_coarse keeps listed groups and re-densifies in order") {
  const LabelHierarchy c100 = grain::load_hierarchy_file(fixture("cifar100.json"));
  const CoarseRestriction r = restrict_coarse(c100, {2, 0, 17});
  CHECK(r.hierarchy.coarse_count() == 3);
  CHECK(r.hierarchy.fine_count() == 15);
  // original order, not request order
  CHECK(r.hierarchy.coarse_names() ==
        std::vector<std::string>{"aquatic mammals", "flowers", "trees"});
  CHECK(r.fine_remap.size() == 100);
  CHECK(r.fine_remap[c100.fine_id("beaver")] == 0);
  CHECK(r.fine_remap[c100.fine_id("orchid")] == 5);
  CHECK(r.fine_remap[c100.fine_id("shark")] == -1);  // dropped group

  // identity restriction maps every class to itself
  std::vector<int> all;
  for (int c = 0; c < c100.coarse_count(); ++c) {
    all.push_back(c);
  }
  const CoarseRestriction id = restrict_coarse(c100, all);
  CHECK(id.hierarchy.fine_names() == c100.fine_names());
  for (int f = 0; f < c100.fine_count(); ++f) {
    CHECK(id.fine_remap[f] == f);
  }

  CHECK_THROWS_AS(restrict_coarse(c100, {}), grain::Error);
  CHECK_THROWS_AS(restrict_coarse(c100, {0, 0}), grain::Error);
  CHECK_THROWS_AS(restrict_coarse(c100, {20}), grain::Error);
}

TEST_CASE("coarse_identity flattens the coarse level into fine classes") {
  const LabelHierarchy h = small();
  const LabelHierarchy id = coarse_identity(h);
  CHECK(id.fine_count() == 2);
  CHECK(id.coarse_count() == 2);
  CHECK(id.fine_names() == h.coarse_names());
  for (int f = 0; f < id.fine_count(); ++f) {
    CHECK(id.coarse_of(f) == f);
  }
}
