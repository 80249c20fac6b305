#include <doctest.h>

#include "pp/corpus.hpp"
#include "pp/error.hpp"
#include "support/check.hpp"

using namespace pp;
using namespace pp::corpus;
using testsupport::code_of;

namespace {

json minimal(const std::string& id) {
  return {{"patent_id", id},
          {"title", "Widget"},
          {"claims", {{{"number", 1}, {"text", "A widget comprising a part."}}}},
          {"filing_date", "2010-01-01"},
          {"grant_date", "2012-01-01"},
          {"expiry_date", "2030-01-01"},
          {"legal_status", "Granted"},
          {"assignee_raw", "Acme Corp."},
          {"cpc_codes", {"G11C16/34"}}};
}

std::string lines(std::initializer_list<json> rows) {
  std::string out;
  for (const auto& r : rows) out += r.dump() + "\n";
  return out;
}

ErrorCode record_error(const json& j) {
  return code_of([&] { record_from_json(j); });
}

}  // namespace

TEST_CASE("minimal record records its absent optional fields") {
  const auto r = record_from_json(minimal("P1"));
  CHECK(r.patent_id == "P1");
  CHECK(r.grant_date == Date(2012, 1, 1));
  CHECK(r.is_missing("forward_citations"));
  CHECK(r.is_missing("inventors"));
  CHECK(std::is_sorted(r.missing_fields.begin(), r.missing_fields.end()));
  CHECK(record_from_json(to_json(r)).missing_fields == r.missing_fields);
  CHECK(to_json(record_from_json(to_json(r))) == to_json(r));
}

TEST_CASE("malformed records name the problem") {
  auto j = minimal("P1");
  j.erase("title");
  CHECK(record_error(j) == ErrorCode::MalformedRecord);

  j = minimal("P1");
  j["patent_id"] = "  ";
  CHECK(record_error(j) == ErrorCode::MalformedRecord);

  j = minimal("P1");
  j["filing_date"] = "2013-01-01";
  CHECK(record_error(j) == ErrorCode::MalformedRecord);

  j = minimal("P1");
  j["grant_date"] = nullptr;
  CHECK(record_error(j) == ErrorCode::MalformedRecord);
  j["legal_status"] = "Pending";
  CHECK(record_error(j) == ErrorCode::Io);

  j = minimal("P1");
  j["legal_status"] = "Dormant";
  CHECK(record_error(j) == ErrorCode::MalformedRecord);

  j = minimal("P1");
  j["litigation_events"] = {{{"outcome", "PlaintiffWin"}, {"case_value", -1}}};
  CHECK(record_error(j) == ErrorCode::MalformedRecord);

  j = minimal("P1");
  j["expiry_date"] = "2030-02-30";
  CHECK(record_error(j) == ErrorCode::MalformedRecord);

  j = minimal("P1");
  j["cip_flag"] = "yes";
  CHECK(record_error(j) == ErrorCode::MalformedRecord);
}

TEST_CASE("ingest modes") {
  const std::string text = lines({minimal("P1"), minimal("P2")}) + "{not json\n\n";
  CHECK(code_of([&] { ingest_portfolio_text(text, Date(2020, 1, 1)); }) == ErrorCode::MalformedRecord);
  const auto r = ingest_portfolio_text(text, Date(2020, 1, 1), IngestMode::Lenient);
  CHECK(r.portfolio.records.size() == 2);
  REQUIRE(r.rejected.size() == 1);
  CHECK(r.rejected[0].line == 3);
  CHECK(r.portfolio.provenance == sha256_hex(text));

  CHECK(code_of([&] { ingest_portfolio_text(lines({minimal("P1"), minimal("P1")}), Date(2020, 1, 1)); }) ==
        ErrorCode::DuplicateId);
  CHECK(code_of([&] { ingest_portfolio_text("\n{bad\n", Date(2020, 1, 1), IngestMode::Lenient); }) ==
        ErrorCode::EmptyPortfolio);
}

TEST_CASE("legal filter keeps granted and pending") {
  Portfolio p;
  for (auto [id, st] : {std::pair{"A", LegalStatus::Granted}, {"B", LegalStatus::Expired}, {"C", LegalStatus::Pending},
                        {"D", LegalStatus::Abandoned}, {"E", LegalStatus::Lapsed}, {"F", LegalStatus::Invalidated}}) {
    PatentRecord r;
    r.patent_id = id;
    r.legal_status = st;
    p.records.push_back(r);
  }
  const auto out = verify_legal_status(p);
  REQUIRE(out.kept.records.size() == 2);
  CHECK(out.kept.records[1].patent_id == "C");
  REQUIRE(out.dropped.size() == 4);
  CHECK(out.dropped[0] == std::pair<std::string, std::string>{"B", "Expired"});
}

TEST_CASE("name normalization") {
  const auto sfx = default_legal_suffixes();
  CHECK(normalize_name("  Acme,  Corp. ", sfx) == "ACME");
  CHECK(normalize_name("Sungwon Electronics Co., Ltd.", sfx) == "SUNGWON ELECTRONICS");
  CHECK(normalize_name("Foo Inc Ltd", sfx) == "FOO");
  CHECK(normalize_name("Corp", sfx) == "CORP");

  EntityAliasTable t;
  t.add("SanDisk Technologies", "WESTERN DIGITAL", sfx);
  t.add("WDC", "WESTERN DIGITAL", sfx);
  CHECK(canonical_name("Sandisk Technologies, LLC", t, sfx) == "WESTERN DIGITAL");
  CHECK(canonical_name("Unrelated GmbH", t, sfx) == normalize_name("Unrelated GmbH", sfx));
  CHECK(code_of([&] { t.add("wdc.", "OTHER", sfx); }) == ErrorCode::Config);
  CHECK(code_of([&] { t.add("X", "", sfx); }) == ErrorCode::Config);
}

TEST_CASE("normalize entities fills canonical names") {
  Portfolio p;
  auto r = record_from_json(minimal("P1"));
  r.inventors = {{"jane  doe", "", {}, {}, {}}};
  p.records.push_back(r);
  EntityAliasTable t;
  t.add("Acme", "ACME HOLDINGS", default_legal_suffixes());
  const auto out = normalize_entities(p, t);
  CHECK(out.records[0].assignee_canonical == "ACME HOLDINGS");
  CHECK(out.records[0].inventors[0].name_canonical == "JANE DOE");
}

TEST_CASE("shipped configuration loads") {
  const std::string dir = std::string(PP_SOURCE_DIR) + "/config/";
  const auto sfx = load_suffix_list(dir + "suffixes.txt");
  CHECK(std::find(sfx.begin(), sfx.end(), "KK") != sfx.end());
  const auto t = load_alias_table(dir + "aliases.csv", sfx);
  CHECK(canonical_name("Sungwon Electronics Co., Ltd.", t, sfx) == "SUNGWON ELECTRONICS");
}
