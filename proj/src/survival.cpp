#include "apter/survival.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>

#include "apter/error.hpp"

namespace apter {

SurvivalDataset::SurvivalDataset(std::vector<SurvivalRecord> records, std::size_t dim)
    : records_(std::move(records)), dim_(dim) {
    if (records_.empty()) throw DataError("empty dataset");
    if (dim_ == 0) throw DataError("dataset has no covariates");
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (r.covariates.size() != dim_) {
            throw DataError("record " + std::to_string(i) + " has " + std::to_string(r.covariates.size()) +
                            " covariates, expected " + std::to_string(dim_));
        }
        if (!std::isfinite(r.time) || r.time < 0.0) {
            throw DataError("record " + std::to_string(i) + " has invalid time");
        }
        for (double v : r.covariates) {
            if (!std::isfinite(v)) throw DataError("record " + std::to_string(i) + " has a non-finite covariate");
        }
    }
}

std::vector<double> SurvivalDataset::times() const {
    std::vector<double> out(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) out[i] = records_[i].time;
    return out;
}

std::vector<double> SurvivalDataset::column(std::size_t feature) const {
    std::vector<double> out(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) out[i] = records_[i].covariates[feature];
    return out;
}

std::size_t SurvivalDataset::event_count() const {
    return static_cast<std::size_t>(
        std::count_if(records_.begin(), records_.end(), [](const SurvivalRecord& r) { return r.event; }));
}

SurvivalDataset SurvivalDataset::subset(std::span<const std::size_t> rows) const {
    std::vector<SurvivalRecord> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(records_.at(r));
    return SurvivalDataset(std::move(out), dim_);
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void fail_at(std::size_t line, std::size_t row, std::size_t col, std::string_view name,
                          const std::string& what) {
    std::ostringstream msg;
    msg << "line " << line << " (row " << row << "), column " << col << " '" << name << "': " << what;
    throw DataError(msg.str());
}

}  // namespace

SurvivalDataset parse_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;

    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
        if (trim(view).empty()) continue;
        for (auto f : split_fields(view)) header.emplace_back(trim(f));
        break;
    }
    if (header.empty()) throw DataError("empty dataset: missing header");
    if (header.size() < 3 || header[0] != "time" || header[1] != "status") {
        throw DataError("malformed header on line " + std::to_string(line_no) +
                        ": expected 'time,status,x1,...,xd'");
    }
    for (std::size_t c = 2; c < header.size(); ++c) {
        if (header[c].empty()) {
            throw DataError("malformed header: column " + std::to_string(c + 1) + " has no name");
        }
    }
    const std::size_t dim = header.size() - 2;

    std::vector<SurvivalRecord> records;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ++row;
        auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw DataError("line " + std::to_string(line_no) + " (row " + std::to_string(row) + "): expected " +
                            std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
        }
        std::vector<double> values(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            auto cell = trim(fields[c]);
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
                fail_at(line_no, row, c + 1, header[c], "not a number: '" + std::string(cell) + "'");
            }
            if (!std::isfinite(v)) fail_at(line_no, row, c + 1, header[c], "non-finite value");
            values[c] = v;
        }
        if (values[0] < 0.0) fail_at(line_no, row, 1, header[0], "negative time");
        if (values[1] != 0.0 && values[1] != 1.0) {
            fail_at(line_no, row, 2, header[1], "status must be 0 or 1, got '" + std::string(trim(fields[1])) + "'");
        }
        SurvivalRecord rec;
        rec.time = values[0];
        rec.event = values[1] == 1.0;
        rec.covariates.assign(values.begin() + 2, values.end());
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw DataError("empty dataset");
    return SurvivalDataset(std::move(records), dim);
}

SurvivalDataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return parse_csv(in);
}

namespace {

void put_double(std::ostream& out, double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, ptr - buf);
}

}  // namespace

void write_csv(const SurvivalDataset& data, std::ostream& out) {
    out << "time,status";
    for (std::size_t j = 0; j < data.dim(); ++j) out << ",x" << (j + 1);
    out << '\n';
    for (const auto& r : data.records()) {
        put_double(out, r.time);
        out << ',' << (r.event ? '1' : '0');
        for (double v : r.covariates) {
            out << ',';
            put_double(out, v);
        }
        out << '\n';
    }
}

void save_csv(const SurvivalDataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    write_csv(data, out);
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> past_event_set(const SurvivalDataset& data, double t) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.event(i) && data.time(i) < t) out.push_back(i);
    }
    return out;
}

namespace {

// Fenwick tree over score ranks.
class RankCounter {
public:
    explicit RankCounter(std::size_t n) : tree_(n + 1, 0) {}

    void insert(std::size_t rank) {
        for (std::size_t i = rank + 1; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
    }

    // Number of inserted ranks <= rank.
    std::uint64_t count_le(std::size_t rank) const {
        std::uint64_t s = 0;
        for (std::size_t i = rank + 1; i > 0; i -= i & (~i + 1)) s += tree_[i];
        return s;
    }

private:
    std::vector<std::uint64_t> tree_;
};

}  // namespace

std::optional<ConcordanceResult> try_concordance(std::span<const double> scores, const SurvivalDataset& data) {
    const std::size_t n = data.size();
    if (scores.size() != n) {
        throw DataError("score vector has length " + std::to_string(scores.size()) + ", dataset has " +
                        std::to_string(n) + " subjects");
    }
    for (double s : scores) {
        if (!std::isfinite(s)) throw DataError("non-finite score");
    }

    // Dense ranks of the scores.
    std::vector<double> distinct(scores.begin(), scores.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<std::size_t> rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        rank[i] = static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), scores[i]) -
                                           distinct.begin());
    }

    std::vector<std::size_t> by_time(n);
    std::iota(by_time.begin(), by_time.end(), 0);
    std::sort(by_time.begin(), by_time.end(),
              [&](std::size_t a, std::size_t b) { return data.time(a) > data.time(b); });

    // Sweep from the latest time down; everything already inserted has a
    // strictly larger time than the current tie group.
    RankCounter later(distinct.size());
    std::uint64_t inserted = 0;
    ConcordanceResult res;
    std::size_t g = 0;
    while (g < n) {
        std::size_t end = g;
        while (end < n && data.time(by_time[end]) == data.time(by_time[g])) ++end;
        for (std::size_t p = g; p < end; ++p) {
            std::size_t i = by_time[p];
            if (!data.event(i)) continue;
            res.comparable_pairs += inserted;
            res.concordant += inserted - later.count_le(rank[i]);
        }
        for (std::size_t p = g; p < end; ++p) later.insert(rank[by_time[p]]);
        inserted += end - g;
        g = end;
    }
    if (res.comparable_pairs == 0) return std::nullopt;
    res.c_index = static_cast<double>(res.concordant) / static_cast<double>(res.comparable_pairs);
    return res;
}

ConcordanceResult concordance(std::span<const double> scores, const SurvivalDataset& data) {
    auto res = try_concordance(scores, data);
    if (!res) throw NoComparablePairs();
    return *res;
}

namespace {

bool time_order_less(const SurvivalDataset& data, std::size_t a, std::size_t b) {
    if (data.time(a) != data.time(b)) return data.time(a) < data.time(b);
    if (data.event(a) != data.event(b)) return data.event(a);
    return a < b;
}

}  // namespace

SortedDataset sort_by_time(const SurvivalDataset& data) {
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return time_order_less(data, a, b); });
    return {data.subset(order), std::move(order)};
}

bool is_time_sorted(const SurvivalDataset& data) {
    for (std::size_t i = 1; i < data.size(); ++i) {
        if (time_order_less(data, i, i - 1)) return false;
    }
    return true;
}

}  // namespace apter
