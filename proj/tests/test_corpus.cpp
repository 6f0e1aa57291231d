#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "citytypo/corpus.hpp"
#include "citytypo/errors.hpp"
#include "citytypo/page_cache.hpp"
#include "citytypo/text.hpp"
#include "citytypo/util.hpp"

using namespace citytypo;

namespace {

std::string temp_dir(const std::string& tag) {
    auto path = std::filesystem::temp_directory_path() / ("citytypo_corpus_" + tag);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
    return path.string();
}

CityRecord labeled(const std::string& id, Typology t) {
    CityRecord r;
    r.city_id = id;
    r.name = id;
    r.url = "file:///none/" + id;
    r.typology_label = t;
    return r;
}

std::vector<CityRecord> labeled_records(std::size_t n) {
    std::vector<CityRecord> records;
    for (std::size_t i = 0; i < n; ++i) {
        records.push_back(labeled("c" + std::to_string(i),
                                  static_cast<Typology>(i % 4)));
    }
    return records;
}

}  // namespace

TEST_CASE("density transform: midpoint, boundaries and clipping") {
    CityRecord a, b, c;
    a.density_per_sq_mi = 1000.0;
    b.density_per_sq_mi = 3000.0;
    c.density_per_sq_mi = 5000.0;
    DensityTransform t = fit_density_transform({&a, &b, &c});
    CHECK(t.apply(3000.0) == doctest::Approx(0.5));
    CHECK(t.apply(5000.0) == 1.0);
    CHECK(t.apply(1000.0) == 0.0);
    CHECK(t.apply(9000.0) == 1.0);    // clipped above
    CHECK(t.apply(10.0) == 0.0);      // clipped below
    CHECK(t.apply(std::nullopt) == doctest::Approx(0.5));  // median imputation
}

TEST_CASE("density transform requires two train densities") {
    CityRecord a, b;
    a.density_per_sq_mi = 1000.0;
    CHECK_THROWS_AS(fit_density_transform({&a, &b}), ConfigError);
    CHECK_THROWS_AS(fit_density_transform({}), ConfigError);
}

TEST_CASE("dataset table round-trips, including commas in names") {
    std::string dir = temp_dir("table");
    std::vector<CityRecord> records;
    CityRecord r1 = labeled("dhaka", Typology::kCongestion);
    r1.name = "Dhaka, Bangladesh";
    r1.url = "https://example.org/wiki/Dhaka";
    r1.via_city = false;
    r1.lat = 23.7639;
    r1.lon = 90.3889;
    CityRecord r2;
    r2.city_id = "newtown";
    r2.name = "Newtown";
    r2.url = "https://example.org/wiki/Newtown";
    records = {r1, r2};

    std::string path = dir + "/cities.csv";
    save_dataset_table(path, records);
    auto loaded = load_dataset_table(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].name == "Dhaka, Bangladesh");
    CHECK(loaded[0].typology_label == Typology::kCongestion);
    CHECK(loaded[0].via_city == false);
    CHECK(*loaded[0].lat == doctest::Approx(23.7639));
    CHECK_FALSE(loaded[1].typology_label.has_value());
    CHECK_FALSE(loaded[1].via_city.has_value());
}

TEST_CASE("via list merge flags matches by url and reports strays") {
    std::string dir = temp_dir("via");
    auto records = labeled_records(3);
    records[1].url = "https://example.org/wiki/ViaTown";
    std::string via_path = dir + "/via.txt";
    write_file(via_path, "ViaTown\thttps://example.org/wiki/ViaTown\n"
                         "Elsewhere\thttps://example.org/wiki/Elsewhere\n");
    auto unmatched = merge_via_list(records, via_path);
    CHECK(records[1].via_city == true);
    CHECK(records[0].via_city == false);
    CHECK(records[2].via_city == false);
    REQUIRE(unmatched.size() == 1);
    CHECK(unmatched[0] == "https://example.org/wiki/Elsewhere");
}

TEST_CASE("sentences file round-trips in order") {
    std::string dir = temp_dir("sent");
    auto records = labeled_records(2);
    records[0].sentences = {"First one.", "Second one."};
    records[1].sentences = {"Only one."};
    std::string path = dir + "/sentences.tsv";
    write_sentences_file(path, records);
    auto loaded = read_sentences_file(path);
    CHECK(loaded.at("c0") == records[0].sentences);
    CHECK(loaded.at("c1") == records[1].sentences);
}

TEST_CASE("build_split: 282 labeled records at 0.7 gives 197/85") {
    auto records = labeled_records(282);
    DatasetSplit split = build_split(records, LabelTask::kCongestion, 0.7, 1234);
    CHECK(split.train.size() == 197);
    CHECK(split.test.size() == 85);
}

TEST_CASE("build_split is deterministic and partitions the records") {
    auto records = labeled_records(50);
    DatasetSplit s1 = build_split(records, LabelTask::kAuto, 0.7, 42);
    DatasetSplit s2 = build_split(records, LabelTask::kAuto, 0.7, 42);
    CHECK(s1.train == s2.train);
    CHECK(s1.test == s2.test);

    std::set<std::string> seen;
    for (const auto& id : s1.train) CHECK(seen.insert(id).second);
    for (const auto& id : s1.test) CHECK(seen.insert(id).second);
    CHECK(seen.size() == records.size());

    DatasetSplit s3 = build_split(records, LabelTask::kAuto, 0.7, 43);
    CHECK(s1.train != s3.train);
}

TEST_CASE("the partition is identical across the four typology tasks") {
    auto records = labeled_records(60);
    DatasetSplit base = build_split(records, LabelTask::kCongestion, 0.7, 7);
    for (LabelTask task : {LabelTask::kAuto, LabelTask::kTransit, LabelTask::kBike}) {
        DatasetSplit other = build_split(records, task, 0.7, 7);
        CHECK(other.train == base.train);
        CHECK(other.test == base.test);
    }
}

TEST_CASE("stratified split keeps per-class proportions") {
    std::vector<CityRecord> records;
    for (int i = 0; i < 40; ++i) records.push_back(labeled("a" + std::to_string(i), Typology::kAuto));
    for (int i = 0; i < 10; ++i) records.push_back(labeled("b" + std::to_string(i), Typology::kBike));
    DatasetSplit split = build_split(records, LabelTask::kBike, 0.7, 5, /*stratified=*/true);
    std::size_t bike_train = 0;
    for (const auto& id : split.train) bike_train += id[0] == 'b';
    CHECK(bike_train == 7);  // round(0.7 * 10)
}

TEST_CASE("build_split rejects missing labels and zero-positive tasks") {
    auto records = labeled_records(10);
    records[3].typology_label.reset();
    CHECK_THROWS_AS(build_split(records, LabelTask::kAuto, 0.7, 1), DataError);

    std::vector<CityRecord> no_bike;
    for (int i = 0; i < 12; ++i) {
        no_bike.push_back(labeled("x" + std::to_string(i), static_cast<Typology>(i % 3)));
    }
    CHECK_THROWS_AS(build_split(no_bike, LabelTask::kBike, 0.7, 1), DataError);
}

TEST_CASE("one-vs-all labels are mutually exclusive and sum to one") {
    auto records = labeled_records(48);
    for (const auto& r : records) {
        int sum = 0;
        for (Typology t : kAllTypologies) sum += binary_label(r, task_of(t));
        CHECK(sum == 1);
    }
}

TEST_CASE("populate_from_page derives density from population and area") {
    CityRecord r = labeled("derive", Typology::kAuto);
    populate_from_page(r,
                       "{{Infobox settlement\n| population_total = 1,000,000\n| area_total_sq_mi = "
                       "100\n}}\nSome body text about the town. It has roads.");
    REQUIRE(r.density_per_sq_mi.has_value());
    CHECK(*r.density_per_sq_mi == doctest::Approx(10000.0));
    CHECK(r.sentences.size() == 2);
    // derived density is exactly population/area
    CHECK(std::abs(*r.density_per_sq_mi - *r.population / *r.area_sq_mi) <= 0.5);
}

TEST_CASE("page cache: fetch, idempotent re-fetch, byte-identical content") {
    std::string dir = temp_dir("cache");
    std::string page_path = dir + "/page.wiki";
    std::string body = "A tiny page. With two sentences.\n";
    write_file(page_path, body);

    PageCache cache(dir + "/cache");
    FetchedPage first = fetch_page("file://" + page_path, cache, "tiny");
    CHECK_FALSE(first.from_cache);
    CHECK(first.content == body);

    // served from cache even with the source gone and fetching disabled
    std::filesystem::remove(page_path);
    FetchedPage second = fetch_page("file://" + page_path, cache, "tiny", /*offline=*/true);
    CHECK(second.from_cache);
    CHECK(second.content == body);  // byte-compare cached vs fresh
    CHECK(second.url == "file://" + page_path);
}

TEST_CASE("page cache: permanent and retriable errors leave the cache untouched") {
    std::string dir = temp_dir("cache_err");
    PageCache cache(dir + "/cache");
    CHECK_THROWS_AS(fetch_page("file:///no/such/file", cache, "ghost"), FetchError);
    try {
        fetch_page("file:///no/such/file", cache, "ghost");
    } catch (const FetchError& e) {
        CHECK_FALSE(e.retriable());  // missing page is permanent
    }
    try {
        fetch_page("file:///no/such/file", cache, "ghost", /*offline=*/true);
    } catch (const FetchError& e) {
        CHECK(e.retriable());  // offline cache miss is retriable
    }
    CHECK_FALSE(cache.get("ghost").has_value());
}
