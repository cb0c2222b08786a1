#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "assaygen/chem.hpp"
#include "assaygen/errors.hpp"
#include "assaygen/eval.hpp"
#include "assaygen/util.hpp"

using namespace assaygen;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
  fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path;
}

eval::ScoreRecord vina_record(const std::string& smiles, double value) {
  eval::ScoreRecord record;
  record.canonical_smiles = chem::parse_smiles(smiles).canonical_smiles;
  record.score_kind = eval::ScoreKind::kVinaDock;
  record.value = value;
  return record;
}

bioassay::ActivityRow row_of(const std::string& smiles) {
  bioassay::ActivityRow row;
  row.smiles = smiles;
  row.outcome = bioassay::Outcome::kActive;
  return row;
}

}  // namespace

TEST_CASE("import_scores reads the SMILES,KIND,VALUE format") {
  SUBCASE("well-formed file") {
    auto path = write_temp("assaygen_eval_ok.csv",
                           "SMILES,KIND,VALUE\n"
                           "CCO,vina_dock,-7.5\n"
                           "CCN,vina_dock,-6\n"
                           "CCO,qed,0.62\n"
                           "CCO,sa,0.31\n"
                           "CCO,herg,0.12\n");
    auto records = eval::import_scores(path.string());
    REQUIRE(records.size() == 5);
    CHECK(records[0].source == eval::ScoreSource::kImportedFile);
    CHECK(records[0].score_kind == eval::ScoreKind::kVinaDock);
    CHECK(records[0].value == doctest::Approx(-7.5));
    CHECK(records[2].score_kind == eval::ScoreKind::kQed);
  }

  SUBCASE("SMILES are canonicalized on import") {
    auto path = write_temp("assaygen_eval_canon.csv",
                           "SMILES,KIND,VALUE\nOCC,vina_dock,-5\n");
    auto records = eval::import_scores(path.string());
    REQUIRE(records.size() == 1);
    CHECK(records[0].canonical_smiles ==
          chem::parse_smiles("CCO").canonical_smiles);
  }

  SUBCASE("unparsable SMILES keep their raw text") {
    auto path = write_temp("assaygen_eval_raw.csv",
                           "SMILES,KIND,VALUE\nC1CC,vina_dock,-5\n");
    auto records = eval::import_scores(path.string());
    REQUIRE(records.size() == 1);
    CHECK(records[0].canonical_smiles == "C1CC");
  }

  SUBCASE("unknown kind names the line") {
    auto path = write_temp("assaygen_eval_kind.csv",
                           "SMILES,KIND,VALUE\nCCO,vina_dock,-7\n"
                           "CCN,dockings,-6\n");
    try {
      eval::import_scores(path.string());
      FAIL("expected UnparseableOutput");
    } catch (const UnparseableOutput& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }

  SUBCASE("bad value, missing header, wrong field count, range check") {
    auto bad_value = write_temp("assaygen_eval_value.csv",
                                "SMILES,KIND,VALUE\nCCO,vina_dock,abc\n");
    CHECK_THROWS_AS(eval::import_scores(bad_value.string()),
                    UnparseableOutput);

    auto no_header =
        write_temp("assaygen_eval_header.csv", "CCO,vina_dock,-7\n");
    CHECK_THROWS_AS(eval::import_scores(no_header.string()),
                    UnparseableOutput);

    auto two_fields =
        write_temp("assaygen_eval_fields.csv", "SMILES,KIND,VALUE\nCCO,-7\n");
    CHECK_THROWS_AS(eval::import_scores(two_fields.string()),
                    UnparseableOutput);

    auto out_of_range = write_temp("assaygen_eval_range.csv",
                                   "SMILES,KIND,VALUE\nCCO,qed,1.5\n");
    CHECK_THROWS_AS(eval::import_scores(out_of_range.string()),
                    UnparseableOutput);
  }
}

TEST_CASE("dock_adapter drives an external scorer") {
  fs::path tool = write_temp("assaygen_fake_dock.sh",
                             "#!/bin/sh\n"
                             "echo \"SMILES,KIND,VALUE\"\n"
                             "while read s; do\n"
                             "  case \"$s\" in\n"
                             "    CCN) ;;\n"
                             "    *) echo \"$s,vina_dock,-7.5\" ;;\n"
                             "  esac\n"
                             "done < \"$1\"\n");
  fs::permissions(tool, fs::perms::owner_all);

  SUBCASE("scores come back per molecule; unscored molecules are reported") {
    eval::ToolConfig config;
    config.executable = tool.string();
    auto result =
        eval::dock_adapter({"CCO", "CCN", "CCC"}, "receptor.pdbqt", config);
    REQUIRE(result.records.size() == 2);
    CHECK(result.records[0].source == eval::ScoreSource::kExternalTool);
    CHECK(result.records[0].value == doctest::Approx(-7.5));
    REQUIRE(result.missing.size() == 1);
    CHECK(result.missing[0] == "CCN");
  }

  SUBCASE("missing executable") {
    eval::ToolConfig config;
    config.executable = "/definitely/not/a/tool";
    CHECK_THROWS_AS(eval::dock_adapter({"CCO"}, "r", config), ToolNotFound);
  }

  SUBCASE("non-zero exit carries a stderr excerpt") {
    fs::path crash = write_temp("assaygen_crash_dock.sh",
                                "#!/bin/sh\n"
                                "echo 'receptor file corrupted' >&2\n"
                                "exit 3\n");
    fs::permissions(crash, fs::perms::owner_all);
    eval::ToolConfig config;
    config.executable = crash.string();
    try {
      eval::dock_adapter({"CCO"}, "r", config);
      FAIL("expected ToolCrash");
    } catch (const ToolCrash& e) {
      CHECK(std::string(e.what()).find("receptor file corrupted") !=
            std::string::npos);
    }
  }

  SUBCASE("garbage output names the offending line") {
    fs::path noisy = write_temp("assaygen_noisy_dock.sh",
                                "#!/bin/sh\n"
                                "echo \"SMILES,KIND,VALUE\"\n"
                                "echo \"banana\"\n");
    fs::permissions(noisy, fs::perms::owner_all);
    eval::ToolConfig config;
    config.executable = noisy.string();
    CHECK_THROWS_AS(eval::dock_adapter({"CCO"}, "r", config),
                    UnparseableOutput);
  }
}

TEST_CASE("high_affinity_fraction counts strictly better scores") {
  CHECK(eval::high_affinity_fraction({-8, -7, -6}, -7) ==
        doctest::Approx(1.0 / 3.0));
  CHECK(eval::high_affinity_fraction({-7, -7, -7}, -7) == 0.0);
  CHECK(eval::high_affinity_fraction({-9, -8.5}, -7) == 1.0);
  CHECK_THROWS_AS(eval::high_affinity_fraction({}, -7), Empty);

  SUBCASE("lowering a score never decreases the fraction") {
    std::mt19937_64 rng(404);
    auto uniform = [&rng](double lo, double hi) {
      return lo + (hi - lo) * static_cast<double>(rng() % 10000) / 10000.0;
    };
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<double> scores;
      std::size_t n = 1 + rng() % 20;
      for (std::size_t i = 0; i < n; ++i) scores.push_back(uniform(-12, -2));
      double reference = uniform(-12, -2);
      double before = eval::high_affinity_fraction(scores, reference);
      scores[rng() % scores.size()] -= uniform(0.0, 3.0);
      double after = eval::high_affinity_fraction(scores, reference);
      CHECK(after >= before);
    }
  }
}

TEST_CASE("improvement_over_baseline follows the sign convention") {
  CHECK(eval::improvement_over_baseline(-8.0, {-7.0}) == doctest::Approx(1.0));
  CHECK(eval::improvement_over_baseline(-7.0, {-7.0}) == 0.0);
  CHECK(eval::improvement_over_baseline(-7.5, {-6.0, -8.0}) == 0.5);
  CHECK_THROWS_AS(eval::improvement_over_baseline(-7.0, {}), EmptyBaseline);

  SUBCASE("improvement + score reproduces the baseline mean") {
    // Quarter-step values make every subtraction exactly representable, so
    // the identity holds bit-for-bit; arbitrary doubles hold to 1e-12.
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<double> baseline;
      std::size_t n = 1 + rng() % 8;
      for (std::size_t i = 0; i < n; ++i) {
        baseline.push_back(-static_cast<double>(rng() % 48) * 0.25);
      }
      double score = -static_cast<double>(rng() % 48) * 0.25;
      double improvement = eval::improvement_over_baseline(score, baseline);
      if (n == 1 || n == 2 || n == 4 || n == 8) {
        CHECK(improvement + score == eval::mean_of(baseline));
      } else {
        CHECK(improvement + score ==
              doctest::Approx(eval::mean_of(baseline)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("mean and median helpers") {
  CHECK(eval::mean_of({-7, -8, -9}) == doctest::Approx(-8.0));
  CHECK(eval::median_of({-9, -7, -8}) == -8.0);
  CHECK(eval::median_of({-9, -7}) == -8.0);
  CHECK_THROWS_AS(eval::mean_of({}), Empty);
  CHECK_THROWS_AS(eval::median_of({}), Empty);

  SUBCASE("odd-length median is an element of the list") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<double> values;
      std::size_t n = 1 + 2 * (rng() % 10);
      for (std::size_t i = 0; i < n; ++i) {
        values.push_back(static_cast<double>(rng() % 1000) / 10.0);
      }
      double med = eval::median_of(values);
      CHECK(std::count(values.begin(), values.end(), med) >= 1);
    }
  }
}

TEST_CASE("build_report assembles per-target metrics") {
  std::vector<std::string> molecules = {
      chem::parse_smiles("CCO").canonical_smiles,
      chem::parse_smiles("CCC").canonical_smiles,
      chem::parse_smiles("CCCC").canonical_smiles,
      chem::parse_smiles("CCCCC").canonical_smiles,  // no score on purpose
  };
  std::vector<eval::ScoreRecord> scores = {
      vina_record("CCO", -8.0),
      vina_record("CCC", -7.0),
      vina_record("CCCC", -6.0),
  };

  auto report = eval::build_report("T1", molecules, 0.9, scores, -7.0,
                                   {-6.0, -8.0},
                                   retrieval::RelevanceGroup::kHigh);
  CHECK(report.target_id == "T1");
  CHECK(report.molecule_count == 4);
  CHECK(report.scored == 3);
  CHECK(report.missing_scores == 1);
  CHECK(report.vina_avg == doctest::Approx(-7.0));
  CHECK(report.vina_med == doctest::Approx(-7.0));
  CHECK(report.has_reference);
  CHECK(report.high_affinity == doctest::Approx(1.0 / 3.0));
  // baseline mean -7: improvements are +1, 0, -1
  CHECK(report.has_improvement);
  CHECK(report.improvement_avg == doctest::Approx(0.0));
  CHECK(report.improvement_med == doctest::Approx(0.0));
  CHECK(report.size_avg == doctest::Approx((3.0 + 3.0 + 4.0 + 5.0) / 4.0));
  CHECK(report.size_med == doctest::Approx(3.5));
  CHECK(report.validity == doctest::Approx(0.9));
  CHECK(report.diversity > 0.0);
  CHECK(report.diversity <= 1.0);
  CHECK(report.relevance_group == retrieval::RelevanceGroup::kHigh);

  SUBCASE("no reference and no baseline leave those metrics unset") {
    auto bare = eval::build_report("T2", molecules, 0.5, scores, std::nullopt,
                                   {}, retrieval::RelevanceGroup::kNo);
    CHECK_FALSE(bare.has_reference);
    CHECK_FALSE(bare.has_improvement);
    CHECK(bare.scored == 3);
  }

  SUBCASE("no scores at all") {
    auto empty = eval::build_report("T3", molecules, 0.5, {}, -7.0,
                                    {-6.0, -8.0},
                                    retrieval::RelevanceGroup::kNo);
    CHECK(empty.scored == 0);
    CHECK(empty.missing_scores == 4);
    CHECK_FALSE(empty.has_reference);
    CHECK_FALSE(empty.has_improvement);
  }
}

TEST_CASE("aggregate_targets means first, then cross-target mean and median") {
  auto report_with = [](const std::string& id, double vina) {
    eval::EvalReport report;
    report.target_id = id;
    report.scored = 10;
    report.vina_avg = vina;
    report.vina_med = vina;
    report.validity = 0.9;
    report.diversity = 0.8;
    report.size_avg = 20;
    report.has_reference = true;
    report.high_affinity = 0.5;
    report.has_improvement = true;
    report.improvement_avg = 1.0;
    return report;
  };

  SUBCASE("single report: avg equals med equals the report") {
    auto aggregate = eval::aggregate_targets({report_with("A", -7.5)});
    CHECK(aggregate.targets == 1);
    CHECK(aggregate.vina.avg == doctest::Approx(-7.5));
    CHECK(aggregate.vina.med == doctest::Approx(-7.5));
  }

  SUBCASE("hand values {-7,-8,-9}") {
    auto aggregate = eval::aggregate_targets({report_with("A", -7),
                                              report_with("B", -8),
                                              report_with("C", -9)});
    CHECK(aggregate.vina.avg == doctest::Approx(-8.0));
    CHECK(aggregate.vina.med == doctest::Approx(-8.0));
    CHECK(aggregate.vina.targets == 3);
  }

  SUBCASE("even count takes the midpoint") {
    auto aggregate = eval::aggregate_targets({report_with("A", -7),
                                              report_with("B", -8)});
    CHECK(aggregate.vina.med == doctest::Approx(-7.5));
  }

  SUBCASE("reports without a metric are skipped for it") {
    auto full = report_with("A", -7);
    eval::EvalReport sparse;
    sparse.target_id = "B";
    sparse.validity = 0.4;
    auto aggregate = eval::aggregate_targets({full, sparse});
    CHECK(aggregate.targets == 2);
    CHECK(aggregate.vina.targets == 1);
    CHECK(aggregate.vina.avg == doctest::Approx(-7.0));
    CHECK(aggregate.validity.targets == 2);
    CHECK(aggregate.validity.avg == doctest::Approx(0.65));
  }

  SUBCASE("empty input throws") {
    CHECK_THROWS_AS(eval::aggregate_targets({}), Empty);
  }
}

TEST_CASE("context_similarity_analysis crosses generated and high scorers") {
  std::vector<chem::Molecule> generated = {chem::parse_smiles("CCO"),
                                           chem::parse_smiles("CCN"),
                                           chem::parse_smiles("c1ccccc1")};
  std::vector<bioassay::ActivityRow> context = {
      row_of("CCO"), row_of("CCCCCCCC"), row_of("c1ccncc1")};
  std::vector<eval::ScoreRecord> scores = {
      vina_record("CCO", -9.0),       // beats reference
      vina_record("CCCCCCCC", -8.0),  // beats reference
      vina_record("c1ccncc1", -6.0),  // does not
  };

  auto analysis =
      eval::context_similarity_analysis(generated, context, scores, -7.0);
  CHECK(analysis.high_scoring_context == 2);
  CHECK(analysis.pairs.size() == 6);

  // CCO appears in both sets, so one pair must be exactly 1.0
  CHECK(std::count(analysis.pairs.begin(), analysis.pairs.end(), 1.0) >= 1);

  std::size_t total = 0;
  for (auto count : analysis.histogram) total += count;
  CHECK(analysis.histogram.size() == 20);
  CHECK(total == analysis.pairs.size());
  CHECK(analysis.histogram[19] >= 1);  // the 1.0 pair lands in the last bin

  SUBCASE("no context molecule beating the reference throws") {
    CHECK_THROWS_AS(
        eval::context_similarity_analysis(generated, context, scores, -9.5),
        NoHighScoringContext);
  }

  SUBCASE("unparsable context rows are skipped") {
    std::vector<bioassay::ActivityRow> noisy = context;
    noisy.push_back(row_of("C1CC"));
    auto again =
        eval::context_similarity_analysis(generated, noisy, scores, -7.0);
    CHECK(again.high_scoring_context == 2);
  }
}

TEST_CASE("herg_deltas pairs before and after scores") {
  std::vector<eval::ScoreRecord> scores;
  auto herg = [](const std::string& smiles, double value) {
    eval::ScoreRecord record;
    record.canonical_smiles = chem::parse_smiles(smiles).canonical_smiles;
    record.score_kind = eval::ScoreKind::kHerg;
    record.value = value;
    return record;
  };
  scores.push_back(herg("CCO", 0.5));
  scores.push_back(herg("CCN", 0.39));
  scores.push_back(herg("CCC", 0.7));

  auto result = eval::herg_deltas({{"CCO", "CCN"}, {"CCC", "CCCC"}}, scores);
  REQUIRE(result.deltas.size() == 1);
  CHECK(result.skipped == 1);
  CHECK(result.deltas[0].before == doctest::Approx(0.5));
  CHECK(result.deltas[0].after == doctest::Approx(0.39));
}

TEST_CASE("report rendering is deterministic") {
  std::vector<std::string> molecules = {
      chem::parse_smiles("CCO").canonical_smiles,
      chem::parse_smiles("CCC").canonical_smiles,
  };
  std::vector<eval::ScoreRecord> scores = {vina_record("CCO", -8.0),
                                           vina_record("CCC", -6.5)};
  auto build = [&]() {
    auto report = eval::build_report("T1", molecules, 1.0, scores, -7.0,
                                     {-6.0, -8.0},
                                     retrieval::RelevanceGroup::kMedium);
    return eval::report_csv({report});
  };
  std::string csv = build();
  CHECK(csv == build());
  CHECK(csv.rfind("target_id,", 0) == 0);
  CHECK(csv.find("T1,2,2,0,") != std::string::npos);
  CHECK(csv.find("Medium") != std::string::npos);

  auto report = eval::build_report("T1", molecules, 1.0, scores, -7.0,
                                   {-6.0, -8.0},
                                   retrieval::RelevanceGroup::kMedium);
  auto summary_text = eval::aggregate_summary(eval::aggregate_targets(
      {report}));
  auto summary = nlohmann::json::parse(summary_text);
  CHECK(summary.at("targets") == 1);
  CHECK(summary.at("improvement_basis") == "per-molecule");
  CHECK(summary.at("metrics").at("vina_avg").at("mean").get<double>() ==
        doctest::Approx(-7.25));
}
