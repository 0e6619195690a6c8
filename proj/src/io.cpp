#include "adalloc/io.hpp"

#include <charconv>
#include <sstream>

namespace adalloc::io {
namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

Money parse_money(const std::string& tok, std::int64_t line) {
  Money v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw ParseError("bad money value '" + tok + "'", line);
  }
  return v;
}

}  // namespace

CampaignBook load_campaigns(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open campaign file " + path.string());
  std::vector<Campaign> campaigns;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto toks = split_ws(line);
    if (toks.size() < 2 || toks.size() > 3) {
      throw ParseError("campaign record needs 2 or 3 fields", lineno);
    }
    Campaign c;
    c.id = toks[0];
    if (toks[1] == "inf") {
      c.is_house = true;
    } else {
      c.budget = parse_money(toks[1], lineno);
      if (c.budget <= 0) throw ParseError("budget must be > 0", lineno);
    }
    if (toks.size() == 3) {
      const Money f = parse_money(toks[2], lineno);
      if (f < 0) throw ParseError("fcap must be >= 0", lineno);
      c.fcap = static_cast<std::int32_t>(f);
    }
    campaigns.push_back(std::move(c));
  }
  try {
    return CampaignBook(std::move(campaigns));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what(), lineno);
  }
}

void write_campaigns(const std::filesystem::path& path, const CampaignBook& book) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write campaign file " + path.string());
  for (const Campaign& c : book.campaigns()) {
    out << c.id << ' ';
    if (c.is_house) {
      out << "inf";
    } else {
      out << c.budget;
    }
    if (c.fcap) out << ' ' << *c.fcap;
    out << '\n';
  }
}

ImpressionReader::ImpressionReader(const std::filesystem::path& path, const CampaignBook& book)
    : in_(path), book_(book) {
  if (!in_) throw std::runtime_error("cannot open impression file " + path.string());
}

std::optional<Impression> ImpressionReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (line.empty() || line[0] == '#') continue;
    const auto toks = split_ws(line);
    if (toks.size() < 2) throw ParseError("impression record needs id and user", line_);
    Impression imp;
    imp.id = toks[0];
    imp.user = toks[1];
    imp.entries.reserve(toks.size() - 2);
    for (std::size_t t = 2; t < toks.size(); ++t) {
      const std::string& tok = toks[t];
      const auto c1 = tok.find(':');
      const auto c2 = tok.find(':', c1 == std::string::npos ? c1 : c1 + 1);
      if (c1 == std::string::npos || c2 == std::string::npos) {
        throw ParseError("bid entry '" + tok + "' is not campaign:r:a", line_);
      }
      const std::string cid = tok.substr(0, c1);
      const auto idx = book_.index_of(cid);
      if (!idx) throw SchemaError("unknown campaign id '" + cid + "'", line_);
      BidEntry e;
      e.campaign = *idx;
      e.revenue = parse_money(tok.substr(c1 + 1, c2 - c1 - 1), line_);
      e.cost = parse_money(tok.substr(c2 + 1), line_);
      if (e.revenue < 0 || e.cost < 0) throw ParseError("negative bid entry", line_);
      imp.entries.push_back(e);
    }
    return imp;
  }
  return std::nullopt;
}

std::vector<Impression> load_impressions(const std::filesystem::path& path,
                                         const CampaignBook& book) {
  ImpressionReader reader(path, book);
  std::vector<Impression> out;
  while (auto imp = reader.next()) out.push_back(std::move(*imp));
  return out;
}

void write_impressions(const std::filesystem::path& path, std::span<const Impression> impressions,
                       const CampaignBook& book) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write impression file " + path.string());
  for (const Impression& imp : impressions) {
    out << imp.id << ' ' << imp.user;
    for (const BidEntry& e : imp.entries) {
      out << ' ' << book.at(e.campaign).id << ':' << e.revenue << ':' << e.cost;
    }
    out << '\n';
  }
}

}  // namespace adalloc::io
