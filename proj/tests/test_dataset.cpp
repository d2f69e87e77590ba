#include <doctest.h>

#include <map>
#include <random>
#include <set>
#include <sstream>

#include "sadd/dataset.hpp"
#include "sadd/error.hpp"
#include "support.hpp"

using namespace sadd;

namespace {

Dataset parse(const std::string& text, CsvOptions options = {}) {
    std::istringstream in(text);
    return parse_csv(in, options);
}

}  // namespace

TEST_CASE("bundled iris loads as four numeric attributes and three classes") {
    const Dataset d = load_csv(testing::data_dir() / "iris.csv");
    CHECK(d.rows() == 150);
    REQUIRE(d.attributes() == 4);
    for (std::size_t j = 0; j < 4; ++j) CHECK(d.is_numeric(j));
    CHECK(d.class_count() == 3);
    CHECK_FALSE(d.has_missing());
}

TEST_CASE("single row, single attribute") {
    const Dataset d = parse("x,class\n1.5,a\n");
    CHECK(d.rows() == 1);
    CHECK(d.attributes() == 1);
    CHECK(d.columns[0].numeric[0] == 1.5);
}

TEST_CASE("question mark marks a missing numeric cell") {
    const Dataset d = parse("x,y,class\n1,?,a\n2,3,b\n");
    CHECK(d.is_numeric(1));
    CHECK(d.is_missing(0, 1));
    CHECK_FALSE(d.is_missing(1, 1));
    CHECK(d.has_missing());
}

TEST_CASE("custom missing token") {
    CsvOptions o;
    o.missing_token = "NA";
    const Dataset d = parse("x,class\nNA,a\n2,b\n", o);
    CHECK(d.is_missing(0, 0));
}

TEST_CASE("kinds are inferred, levels and classes follow first appearance") {
    const Dataset d = parse("a,b,class\nred,1,yes\nblue,2,no\nred,3,yes\n");
    CHECK_FALSE(d.is_numeric(0));
    CHECK(d.is_numeric(1));
    CHECK(d.columns[0].levels == std::vector<std::string>{"red", "blue"});
    CHECK(d.columns[0].codes == std::vector<int>{0, 1, 0});
    CHECK(d.class_names == std::vector<std::string>{"yes", "no"});
    CHECK(d.labels == std::vector<int>{0, 1, 0});
    CHECK(d.class_column == "class");
}

TEST_CASE("schema hint overrides inference and checks names") {
    std::istringstream schema_text("# comment\na,categorical\nb,numeric\n");
    CsvOptions o;
    o.schema_hint = parse_schema(schema_text);
    const Dataset d = parse("a,b,class\n1,1,x\n2,2,y\n", o);
    CHECK_FALSE(d.is_numeric(0));
    CHECK(d.columns[0].levels == std::vector<std::string>{"1", "2"});

    o.schema_hint = Schema{{"z", AttributeKind::Numeric}, {"b", AttributeKind::Numeric}};
    CHECK_THROWS_AS(parse("a,b,class\n1,1,x\n", o), Error);
}

TEST_CASE("malformed input is rejected with a load error") {
    CHECK_THROWS_AS(parse("x,class\n1,a\n2\n"), Error);
    CHECK_THROWS_AS(parse("x,class\n"), Error);
    CHECK_THROWS_AS(parse(""), Error);
    CHECK_THROWS_AS(parse("x,class\n1,?\n"), Error);
    CsvOptions o;
    o.schema_hint = Schema{{"x", AttributeKind::Numeric}};
    CHECK_THROWS_AS(parse("x,class\nabc,a\n", o), Error);
    try {
        parse("x,class\n1,a\n2\n");
    } catch (const Error& e) {
        CHECK(e.stage() == "load");
    }
}

TEST_CASE("quoted fields may contain commas") {
    const Dataset d = parse("name,class\n\"a,b\",x\nc,y\n");
    CHECK(d.columns[0].levels[0] == "a,b");
}

TEST_CASE("numeric imputation uses the reference mean") {
    const Dataset d = parse("x,class\n1,a\n?,a\n3,b\n");
    const Dataset filled = impute_missing(d, d);
    CHECK(filled.columns[0].numeric == std::vector<double>{1.0, 2.0, 3.0});
    CHECK_FALSE(filled.has_missing());
}

TEST_CASE("categorical imputation uses the reference mode") {
    const Dataset d = parse("c,class\na,x\na,x\nb,y\n?,y\n");
    const Dataset filled = impute_missing(d, d);
    CHECK(filled.columns[0].codes[3] == 0);
    CHECK(filled.columns[0].levels[0] == "a");
}

TEST_CASE("mode ties go to the lexicographically smallest level") {
    const Dataset d = parse("c,class\nz,x\na,x\n?,y\n");
    CHECK(impute_missing(d, d).columns[0].levels[impute_missing(d, d).columns[0].codes[2]] == "a");
}

TEST_CASE("test-fold gaps take the training mean, not the pooled mean") {
    // Training rows 0-2 have mean 2; pooled non-missing mean would be 5.5.
    const Dataset d = parse("x,class\n1,a\n2,a\n3,b\n10,b\n?,a\n20,b\n");
    const std::vector<std::size_t> train{0, 1, 2};
    const Dataset filled = impute_missing(d, d.subset(train));
    CHECK(filled.columns[0].numeric[4] == doctest::Approx(2.0));
}

TEST_CASE("an all-missing training column cannot be imputed") {
    const Dataset d = parse("x,class\n?,a\n?,b\n");
    CHECK_THROWS_AS(compute_imputation(d), Error);
}

TEST_CASE("imputation is idempotent") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        std::ostringstream csv;
        csv << "x,c,class\n";
        for (int r = 0; r < 20; ++r) {
            csv << (rng() % 4 == 0 ? std::string("?") : std::to_string(rng() % 100)) << ','
                << (rng() % 4 == 0 ? std::string("?") : std::string(1, static_cast<char>('a' + rng() % 3))) << ','
                << (rng() % 2) << '\n';
        }
        Dataset d;
        try {
            d = parse(csv.str());
        } catch (const Error&) {
            continue;
        }
        try {
            const Dataset once = impute_missing(d, d);
            CHECK(impute_missing(once, once) == once);
            CHECK(apply_imputation(once, compute_imputation(d)) == once);
        } catch (const Error&) {
        }
    }
}

TEST_CASE("write then load round-trips bit-exactly") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int trial = 0; trial < 20; ++trial) {
        std::ostringstream csv;
        csv << "a,b,class\n";
        for (int r = 0; r < 30; ++r) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", u(rng) / 7.0);
            csv << buf << ',' << (r % 5 == 0 ? "?" : std::string(1, static_cast<char>('p' + rng() % 4))) << ','
                << "k" << rng() % 3 << '\n';
        }
        const Dataset d = parse(csv.str());
        std::ostringstream out;
        write_csv(d, out);
        CsvOptions o;
        o.schema_hint = d.schema;
        const Dataset back = parse(out.str(), o);
        CHECK(back == d);
    }
}

TEST_CASE("iris folds hold five rows per class") {
    const Dataset d = load_csv(testing::data_dir() / "iris.csv");
    const FoldPlan plan = stratified_folds(d, 10, 1);
    for (int f = 0; f < 10; ++f) {
        std::map<int, int> per_class;
        for (std::size_t r : plan.test_rows(f)) ++per_class[d.labels[r]];
        for (int c = 0; c < 3; ++c) CHECK(per_class[c] == 5);
    }
}

TEST_CASE("seven rows of one class into three folds") {
    const std::vector<int> labels(7, 0);
    const FoldPlan plan = stratified_folds(labels, 3, 5);
    std::multiset<std::size_t> sizes;
    for (int f = 0; f < 3; ++f) sizes.insert(plan.test_rows(f).size());
    CHECK(sizes == std::multiset<std::size_t>{2, 2, 3});
}

TEST_CASE("fold plans are deterministic per seed") {
    std::vector<int> labels;
    for (int i = 0; i < 97; ++i) labels.push_back(i % 4);
    CHECK(stratified_folds(labels, 10, 3).fold_of == stratified_folds(labels, 10, 3).fold_of);
    CHECK(stratified_folds(labels, 10, 3).fold_of != stratified_folds(labels, 10, 4).fold_of);
}

TEST_CASE("fold plan balance: per-class fold counts differ by at most one") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 10 + rng() % 200;
        const int k = 1 + static_cast<int>(rng() % 6);
        const int folds = 2 + static_cast<int>(rng() % 9);
        std::vector<int> labels(n);
        for (auto& y : labels) y = static_cast<int>(rng() % k);
        const FoldPlan plan = stratified_folds(labels, folds, rng());
        std::vector<std::vector<int>> count(k, std::vector<int>(folds, 0));
        for (std::size_t r = 0; r < n; ++r) {
            REQUIRE(plan.fold_of[r] >= 0);
            REQUIRE(plan.fold_of[r] < folds);
            ++count[labels[r]][plan.fold_of[r]];
        }
        for (int c = 0; c < k; ++c) {
            const auto [lo, hi] = std::minmax_element(count[c].begin(), count[c].end());
            CHECK(*hi - *lo <= 1);
        }
        std::size_t total = 0;
        for (int f = 0; f < folds; ++f) {
            const auto tr = plan.train_rows(f);
            const auto te = plan.test_rows(f);
            total += te.size();
            CHECK(tr.size() + te.size() == n);
        }
        CHECK(total == n);
    }
}

TEST_CASE("bad fold counts are rejected") {
    const std::vector<int> labels{0, 1, 0};
    CHECK_THROWS_AS(stratified_folds(labels, 1, 0), Error);
    CHECK_THROWS_AS(stratified_folds(labels, 4, 0), Error);
}

TEST_CASE("labeled fraction one keeps every row labeled") {
    std::vector<std::size_t> rows(20);
    std::vector<int> labels(20);
    for (std::size_t i = 0; i < 20; ++i) {
        rows[i] = i;
        labels[i] = static_cast<int>(i % 2);
    }
    const auto s = split_labeled_fraction(rows, labels, 1.0, 9);
    CHECK(s.labeled_rows.size() == 20);
    CHECK(s.unlabeled_rows.empty());
}

TEST_CASE("forty percent of a hundred rows stay labeled") {
    std::vector<std::size_t> rows(100);
    std::vector<int> labels(100);
    for (std::size_t i = 0; i < 100; ++i) {
        rows[i] = i;
        labels[i] = static_cast<int>(i % 3);
    }
    const auto s = split_labeled_fraction(rows, labels, 0.4, 2);
    CHECK(s.labeled_rows.size() == 40);
    CHECK(s.unlabeled_rows.size() == 60);
}

TEST_CASE("two seeds give different splits with equal per-class sizes") {
    // 10 rows, classes 6/4, fraction 0.5: quotas 3 and 2 by hand.
    std::vector<std::size_t> rows(10);
    std::vector<int> labels{0, 0, 0, 0, 0, 0, 1, 1, 1, 1};
    for (std::size_t i = 0; i < 10; ++i) rows[i] = i;
    const auto a = split_labeled_fraction(rows, labels, 0.5, 1);
    const auto b = split_labeled_fraction(rows, labels, 0.5, 2);
    auto sizes = [&](const LabeledSplit& s) {
        std::map<int, int> m;
        for (std::size_t r : s.labeled_rows) ++m[labels[r]];
        return m;
    };
    CHECK(sizes(a) == std::map<int, int>{{0, 3}, {1, 2}});
    CHECK(sizes(b) == std::map<int, int>{{0, 3}, {1, 2}});
    CHECK(a.labeled_rows != b.labeled_rows);
}

TEST_CASE("fractions outside (0, 1] are rejected") {
    const std::vector<std::size_t> rows{0, 1};
    const std::vector<int> labels{0, 1};
    CHECK_THROWS_AS(split_labeled_fraction(rows, labels, 0.0, 1), Error);
    CHECK_THROWS_AS(split_labeled_fraction(rows, labels, 1.5, 1), Error);
}
