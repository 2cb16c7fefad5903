#include "bcbench/impute.hpp"

#include "bcbench/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace bcbench {

bool DenseMatrix::missing(std::size_t r, std::size_t c) const { return std::isnan(at(r, c)); }

std::size_t DenseMatrix::missing_count() const {
    return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](double v) { return std::isnan(v); }));
}

std::string ImputationReport::to_json() const {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : columns)
        cols.push_back({{"column", c.column},
                        {"missing_before", c.missing_before},
                        {"filled_by_session", c.filled_by_session},
                        {"filled_by_knn", c.filled_by_knn}});
    nlohmann::json doc = {{"k", k}, {"distance", distance}, {"columns", cols}};
    return doc.dump(2) + "\n";
}

PartialDistance PartialDistance::fit(const DenseMatrix& m) {
    PartialDistance d;
    d.mean.assign(m.cols, 0.0);
    d.sd.assign(m.cols, 1.0);
    for (std::size_t c = 0; c < m.cols; ++c) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t r = 0; r < m.rows; ++r)
            if (!m.missing(r, c)) {
                sum += m.at(r, c);
                ++n;
            }
        if (n == 0) continue;
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t r = 0; r < m.rows; ++r)
            if (!m.missing(r, c)) ss += (m.at(r, c) - mean) * (m.at(r, c) - mean);
        d.mean[c] = mean;
        if (n >= 2 && ss > 0.0) d.sd[c] = std::sqrt(ss / static_cast<double>(n - 1));
    }
    return d;
}

double PartialDistance::operator()(const DenseMatrix& m, std::size_t a, std::size_t b) const {
    double sum = 0.0;
    std::size_t shared = 0;
    for (std::size_t c = 0; c < m.cols; ++c) {
        const double x = m.at(a, c), y = m.at(b, c);
        if (std::isnan(x) || std::isnan(y)) continue;
        const double d = (x - y) / sd[c];
        sum += d * d;
        ++shared;
    }
    if (shared == 0) return std::numeric_limits<double>::infinity();
    return std::sqrt(sum * static_cast<double>(m.cols) / static_cast<double>(shared));
}

std::vector<std::size_t> nearest_observed(const DenseMatrix& m, std::span<const double> distances_from_row, std::size_t row,
                                          std::size_t col, std::size_t k) {
    std::vector<std::size_t> cand;
    cand.reserve(m.rows);
    for (std::size_t r = 0; r < m.rows; ++r)
        if (r != row && !m.missing(r, col)) cand.push_back(r);
    const std::size_t take = std::min(k, cand.size());
    auto closer = [&](std::size_t x, std::size_t y) {
        const double dx = distances_from_row[x], dy = distances_from_row[y];
        return dx != dy ? dx < dy : x < y;
    };
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end(), closer);
    cand.resize(take);
    return cand;
}

namespace {

std::vector<double> distances_from(const DenseMatrix& m, const PartialDistance& dist, std::size_t row) {
    std::vector<double> d(m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) d[r] = r == row ? 0.0 : dist(m, row, r);
    return d;
}

std::vector<std::size_t> observed_counts(const DenseMatrix& m) {
    std::vector<std::size_t> n(m.cols, 0);
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < m.cols; ++c) n[c] += !m.missing(r, c);
    return n;
}

}  // namespace

KnnResult knn_impute(const DenseMatrix& m, std::size_t k, std::span<const std::string> column_names) {
    if (k == 0) throw InvalidK("k must be at least 1");
    if (!column_names.empty() && column_names.size() != m.cols)
        throw SchemaError("column name count differs from matrix width");
    auto name_of = [&](std::size_t c) { return column_names.empty() ? "col" + std::to_string(c) : column_names[c]; };

    KnnResult out;
    out.matrix = m;
    out.report.k = k;
    const auto observed = observed_counts(m);
    for (std::size_t c = 0; c < m.cols; ++c) {
        ColumnImputation ci;
        ci.column = name_of(c);
        ci.missing_before = m.rows - observed[c];
        if (ci.missing_before > 0 && observed[c] < k) throw InsufficientNeighbors(ci.column, observed[c], k);
        out.report.columns.push_back(std::move(ci));
    }

    const PartialDistance dist = PartialDistance::fit(m);
    for (std::size_t r = 0; r < m.rows; ++r) {
        bool any = false;
        for (std::size_t c = 0; c < m.cols && !any; ++c) any = m.missing(r, c);
        if (!any) continue;
        const auto d = distances_from(m, dist, r);
        for (std::size_t c = 0; c < m.cols; ++c) {
            if (!m.missing(r, c)) continue;
            const auto nn = nearest_observed(m, d, r, c, k);
            double sum = 0.0;
            for (auto i : nn) sum += m.at(i, c);
            out.matrix.at(r, c) = sum / static_cast<double>(nn.size());
            ++out.report.columns[c].filled_by_knn;
        }
    }
    return out;
}

std::vector<std::size_t> fill_within_session(std::vector<BehaviorRecord>& records) {
    const auto& cols = env_columns();
    std::vector<std::size_t> filled(cols.size(), 0);

    std::map<std::string, std::vector<std::size_t>> sessions;
    for (std::size_t i = 0; i < records.size(); ++i) sessions[records[i].session_id].push_back(i);

    for (auto& [id, members] : sessions) {
        std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            return records[a].env.stamp.epoch_seconds() < records[b].env.stamp.epoch_seconds();
        });
        // Fill from the pre-fill snapshot so filled values never propagate.
        std::vector<EnvironmentSnapshot> snapshot;
        snapshot.reserve(members.size());
        for (auto i : members) snapshot.push_back(records[i].env);

        for (std::size_t ci = 0; ci < cols.size(); ++ci) {
            const auto& col = cols[ci];
            for (std::size_t p = 0; p < members.size(); ++p) {
                if (snapshot[p].observed(col)) continue;
                const auto t = snapshot[p].stamp.epoch_seconds();
                std::optional<std::size_t> best;
                std::int64_t best_gap = 0;
                for (std::size_t q = 0; q < members.size(); ++q) {
                    if (q == p || !snapshot[q].observed(col)) continue;
                    const std::int64_t gap = std::llabs(snapshot[q].stamp.epoch_seconds() - t);
                    // Members are time ordered, so a strict comparison keeps
                    // the earlier record on equal gaps.
                    if (!best || gap < best_gap) {
                        best = q;
                        best_gap = gap;
                    }
                }
                if (!best) continue;
                auto& env = records[members[p]].env;
                if (col.categorical) env.categorical[col.slot] = snapshot[*best].categorical[col.slot];
                else env.numeric[col.slot] = snapshot[*best].numeric[col.slot];
                ++filled[ci];
            }
        }
    }
    return filled;
}

RecordImputation impute_records(std::vector<BehaviorRecord> records, const ImputeOptions& options) {
    if (options.k == 0) throw InvalidK("k must be at least 1");
    const auto& cols = env_columns();
    RecordImputation out;
    out.report.k = options.k;
    for (const auto& col : cols) {
        ColumnImputation ci;
        ci.column = std::string(col.name);
        for (const auto& r : records) ci.missing_before += !r.env.observed(col);
        out.report.columns.push_back(std::move(ci));
    }
    if (options.session_fill) {
        const auto filled = fill_within_session(records);
        for (std::size_t i = 0; i < cols.size(); ++i) out.report.columns[i].filled_by_session = filled[i];
    }

    const std::size_t n = records.size();
    DenseMatrix num{n, kEnvNumericCount, std::vector<double>(n * kEnvNumericCount)};
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < kEnvNumericCount; ++c)
            num.at(r, c) = records[r].env.numeric[c].value_or(std::numeric_limits<double>::quiet_NaN());

    // Column checks up front so a failure leaves nothing half-imputed.
    for (std::size_t i = 0; i < cols.size(); ++i) {
        std::size_t observed = 0;
        for (const auto& r : records) observed += r.env.observed(cols[i]);
        if (observed < n && observed < options.k)
            throw InsufficientNeighbors(std::string(cols[i].name), observed, options.k);
    }

    std::vector<std::string> num_names(kEnvNumericCount);
    for (const auto& col : cols)
        if (!col.categorical) num_names[col.slot] = std::string(col.name);
    const KnnResult knn = knn_impute(num, options.k, num_names);

    // Categorical neighbors must observe the level before any k-NN fill.
    std::vector<std::array<std::optional<std::string>, kEnvCategoricalCount>> levels(n);
    for (std::size_t r = 0; r < n; ++r) levels[r] = records[r].env.categorical;

    const PartialDistance dist = PartialDistance::fit(num);
    for (std::size_t r = 0; r < n; ++r) {
        auto& env = records[r].env;
        for (std::size_t c = 0; c < kEnvNumericCount; ++c)
            if (!env.numeric[c]) env.numeric[c] = knn.matrix.at(r, c);
        if (std::all_of(levels[r].begin(), levels[r].end(), [](const auto& v) { return v.has_value(); })) continue;
        const auto d = distances_from(num, dist, r);
        auto closer = [&](std::size_t x, std::size_t y) { return d[x] != d[y] ? d[x] < d[y] : x < y; };
        for (std::size_t i = 0; i < cols.size(); ++i) {
            const auto& col = cols[i];
            if (!col.categorical || levels[r][col.slot]) continue;
            std::vector<std::size_t> cand;
            for (std::size_t q = 0; q < n; ++q)
                if (q != r && levels[q][col.slot]) cand.push_back(q);
            const std::size_t take = std::min(options.k, cand.size());
            std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end(), closer);
            std::map<std::string, std::size_t> votes;
            for (std::size_t j = 0; j < take; ++j) ++votes[*levels[cand[j]][col.slot]];
            auto best = votes.begin();
            for (auto it = votes.begin(); it != votes.end(); ++it)
                if (it->second > best->second) best = it;
            env.categorical[col.slot] = best->first;
            ++out.report.columns[i].filled_by_knn;
        }
    }
    for (std::size_t i = 0; i < cols.size(); ++i)
        if (!cols[i].categorical) out.report.columns[i].filled_by_knn = knn.report.columns[cols[i].slot].filled_by_knn;
    out.records = std::move(records);
    return out;
}

}  // namespace bcbench
