#include "bcbench/forest.hpp"

#include "bcbench/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace bcbench {

BinnedMatrix::BinnedMatrix(const FeatureMatrix& m) : rows_(m.rows()) {
    const std::size_t p = m.cols();
    codes_.resize(p * rows_);
    order_.resize(p * rows_);
    uniques_.resize(p);
    std::vector<double> col(rows_);
    for (std::size_t c = 0; c < p; ++c) {
        for (std::size_t r = 0; r < rows_; ++r) col[r] = m.at(r, c);
        auto& u = uniques_[c];
        u = col;
        std::sort(u.begin(), u.end());
        u.erase(std::unique(u.begin(), u.end()), u.end());
        for (std::size_t r = 0; r < rows_; ++r)
            codes_[c * rows_ + r] =
                static_cast<std::uint32_t>(std::lower_bound(u.begin(), u.end(), col[r]) - u.begin());
        // Counting sort by code, rows ascending within a code.
        std::vector<std::uint32_t> start(u.size() + 1, 0);
        for (std::size_t r = 0; r < rows_; ++r) ++start[codes_[c * rows_ + r] + 1];
        for (std::size_t k = 1; k < start.size(); ++k) start[k] += start[k - 1];
        for (std::size_t r = 0; r < rows_; ++r)
            order_[c * rows_ + start[codes_[c * rows_ + r]]++] = static_cast<std::uint32_t>(r);
    }
}

double BinnedMatrix::threshold(std::size_t c, std::uint32_t lo, std::uint32_t hi) const {
    const double a = uniques_[c][lo], b = uniques_[c][hi];
    const double mid = a + (b - a) / 2.0;
    // Guard against the midpoint rounding onto the upper value.
    return mid < b ? mid : a;
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> row) const {
    std::size_t i = 0;
    while (nodes_[i].feature >= 0) {
        const auto& n = nodes_[i];
        i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes_[i];
}

std::size_t DecisionTree::depth() const {
    if (nodes_.empty()) return 0;
    std::vector<std::size_t> d(nodes_.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        if (n.feature < 0) continue;
        d[static_cast<std::size_t>(n.left)] = d[i] + 1;
        d[static_cast<std::size_t>(n.right)] = d[i] + 1;
        best = std::max(best, d[i] + 1);
    }
    return best;
}

std::size_t default_mtry(std::size_t n_features) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n_features)))));
}

namespace {

struct Split {
    bool found = false;
    std::size_t feature = 0;
    std::uint32_t left_max = 0;  // codes <= left_max go left
    double threshold = 0.0;
    double gain = 0.0;
};

// Scratch buffers reused across nodes of one tree.
struct GiniScratch {
    std::vector<double> hist;   // distinct x classes
    std::vector<double> total;  // distinct
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;  // (code, row)
    std::vector<double> left, right;
};

// Best Gini split of one feature over weighted rows. Score is
// sum_c L_c^2/n_L + sum_c R_c^2/n_R, which exceeds the parent's sum_c P_c^2/n
// by exactly the weighted impurity decrease.
void best_gini_split(const BinnedMatrix& x, std::span<const int> labels, std::span<const double> weight,
                     int n_classes, std::span<const std::uint32_t> idx, std::size_t f,
                     std::span<const double> parent_counts, double n_total, double parent_score, double min_leaf,
                     GiniScratch& s, Split& best) {
    const std::size_t m = idx.size();
    const std::size_t d = x.distinct(f);
    if (d < 2) return;
    const std::uint32_t* codes = x.column_codes(f);
    const auto C = static_cast<std::size_t>(n_classes);

    s.left.assign(C, 0.0);
    s.right.assign(parent_counts.begin(), parent_counts.end());
    double sum_l2 = 0.0, sum_r2 = 0.0;
    for (double v : s.right) sum_r2 += v * v;
    double n_left = 0.0;

    auto consider = [&](std::uint32_t lo, std::uint32_t hi) {
        const double n_right = n_total - n_left;
        if (n_left < min_leaf || n_right < min_leaf) return;
        const double score = sum_l2 / n_left + sum_r2 / n_right;
        const double gain = score - parent_score;
        if (gain > 1e-12 && (!best.found || gain > best.gain)) {
            best.found = true;
            best.feature = f;
            best.left_max = lo;
            best.threshold = x.threshold(f, lo, hi);
            best.gain = gain;
        }
    };
    auto move_left = [&](std::size_t c, double k) {
        sum_l2 += (s.left[c] + k) * (s.left[c] + k) - s.left[c] * s.left[c];
        sum_r2 += (s.right[c] - k) * (s.right[c] - k) - s.right[c] * s.right[c];
        s.left[c] += k;
        s.right[c] -= k;
    };

    if (d * (C + 1) <= 4 * m) {
        s.hist.assign(d * C, 0.0);
        s.total.assign(d, 0.0);
        for (auto r : idx) {
            const auto code = codes[r];
            s.hist[code * C + static_cast<std::size_t>(labels[r])] += weight[r];
            s.total[code] += weight[r];
        }
        std::optional<std::uint32_t> prev;
        for (std::uint32_t code = 0; code < d; ++code) {
            if (s.total[code] == 0.0) continue;
            if (prev) consider(*prev, code);
            for (std::size_t c = 0; c < C; ++c)
                if (s.hist[code * C + c] > 0) move_left(c, s.hist[code * C + c]);
            n_left += s.total[code];
            prev = code;
        }
    } else {
        s.pairs.resize(m);
        for (std::size_t i = 0; i < m; ++i) s.pairs[i] = {codes[idx[i]], idx[i]};
        std::sort(s.pairs.begin(), s.pairs.end());
        for (std::size_t i = 0; i < m; ++i) {
            if (i > 0 && s.pairs[i].first != s.pairs[i - 1].first) consider(s.pairs[i - 1].first, s.pairs[i].first);
            const auto r = s.pairs[i].second;
            move_left(static_cast<std::size_t>(labels[r]), weight[r]);
            n_left += weight[r];
        }
    }
}

struct Pending {
    std::size_t node;
    std::size_t begin, end;
    std::size_t depth;
};

// Stable in-place partition of idx[begin, end) by the split; returns the
// first index of the right child.
std::size_t partition_rows(const BinnedMatrix& x, std::vector<std::uint32_t>& idx, std::size_t begin,
                           std::size_t end, std::size_t f, std::uint32_t left_max,
                           std::vector<std::uint32_t>& spill) {
    const std::uint32_t* codes = x.column_codes(f);
    spill.clear();
    std::size_t out = begin;
    for (std::size_t i = begin; i < end; ++i) {
        const auto r = idx[i];
        if (codes[r] <= left_max)
            idx[out++] = r;
        else
            spill.push_back(r);
    }
    std::copy(spill.begin(), spill.end(), idx.begin() + static_cast<std::ptrdiff_t>(out));
    return out;
}

}  // namespace

DecisionTree grow_classification_tree(const BinnedMatrix& x, std::span<const int> labels, int n_classes,
                                      std::span<const std::uint32_t> sample, const ClassificationTreeParams& params,
                                      Rng& rng, std::vector<double>* importance) {
    if (sample.empty()) throw EmptyInput("tree sample is empty");
    const std::size_t p = x.cols();
    const std::size_t mtry = params.mtry == 0 ? p : std::min(params.mtry, p);
    const double min_leaf = static_cast<double>(std::max<std::size_t>(1, params.min_leaf));
    const auto C = static_cast<std::size_t>(n_classes);
    const double total = static_cast<double>(sample.size());

    // Repeated draws become row weights, so each distinct row is scanned once.
    std::vector<double> weight(x.rows(), 0.0);
    for (auto r : sample) weight[r] += 1.0;
    std::vector<std::uint32_t> idx;
    for (std::size_t r = 0; r < x.rows(); ++r)
        if (weight[r] > 0.0) idx.push_back(static_cast<std::uint32_t>(r));

    std::vector<TreeNode> nodes(1);
    std::vector<Pending> stack{{0, 0, idx.size(), 0}};
    std::vector<std::size_t> features(p);
    std::vector<double> counts(C);
    std::vector<std::uint32_t> spill;
    GiniScratch scratch;

    while (!stack.empty()) {
        const Pending cur = stack.back();
        stack.pop_back();
        const std::span<const std::uint32_t> rows(idx.data() + cur.begin, cur.end - cur.begin);

        std::fill(counts.begin(), counts.end(), 0.0);
        double m = 0.0;
        for (auto r : rows) {
            counts[static_cast<std::size_t>(labels[r])] += weight[r];
            m += weight[r];
        }
        std::size_t majority = 0;
        for (std::size_t c = 1; c < C; ++c)
            if (counts[c] > counts[majority]) majority = c;
        nodes[cur.node].value = static_cast<double>(majority);

        const bool pure = counts[majority] == m;
        const bool depth_hit = params.max_depth != 0 && cur.depth >= params.max_depth;
        if (pure || depth_hit || m < 2 * min_leaf || rows.size() < 2) continue;

        double parent_score = 0.0;
        for (double v : counts) parent_score += v * v;
        parent_score /= m;

        // Partial Fisher-Yates draw of mtry distinct features.
        std::iota(features.begin(), features.end(), std::size_t{0});
        Split best;
        for (std::size_t k = 0; k < mtry; ++k) {
            const std::size_t j = k + rng.index(p - k);
            std::swap(features[k], features[j]);
            best_gini_split(x, labels, weight, n_classes, rows, features[k], counts, m, parent_score, min_leaf,
                            scratch, best);
        }
        if (!best.found) continue;

        if (importance) (*importance)[best.feature] += best.gain / total;
        const std::size_t mid = partition_rows(x, idx, cur.begin, cur.end, best.feature, best.left_max, spill);
        const auto left = static_cast<std::int32_t>(nodes.size());
        nodes.push_back({});
        nodes.push_back({});
        auto& node = nodes[cur.node];
        node.feature = static_cast<std::int32_t>(best.feature);
        node.threshold = best.threshold;
        node.left = left;
        node.right = left + 1;
        stack.push_back({static_cast<std::size_t>(left + 1), mid, cur.end, cur.depth + 1});
        stack.push_back({static_cast<std::size_t>(left), cur.begin, mid, cur.depth + 1});
    }
    return DecisionTree(std::move(nodes));
}

DecisionTree grow_gradient_tree(const BinnedMatrix& x, std::span<const double> grad, std::span<const double> hess,
                                const GradientTreeParams& params, double shrinkage) {
    // Level-wise growth: one pass over each column's presorted rows scores
    // every open node of the level at once.
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    const double lambda = params.lambda;
    auto score = [lambda](double g, double h) { return g * g / (h + lambda); };

    std::vector<TreeNode> nodes(1);
    std::vector<std::int32_t> node_of(n, 0);
    struct Open {
        std::size_t node;
        double g = 0.0, h = 0.0;
        Split best;
        double gl = 0.0, hl = 0.0;
        std::int64_t last = -1;
    };
    std::vector<Open> open(1);
    open[0].node = 0;
    for (std::size_t r = 0; r < n; ++r) {
        open[0].g += grad[r];
        open[0].h += hess[r];
    }
    nodes[0].value = -open[0].g / (open[0].h + lambda) * shrinkage;
    std::vector<std::int32_t> slot_of(1, 0);

    for (std::size_t depth = 0; depth < params.max_depth && !open.empty(); ++depth) {
        for (std::size_t f = 0; f < p; ++f) {
            if (x.distinct(f) < 2) continue;
            const std::uint32_t* codes = x.column_codes(f);
            for (auto& o : open) {
                o.gl = o.hl = 0.0;
                o.last = -1;
            }
            for (auto r : x.sorted_rows(f)) {
                const auto s = slot_of[static_cast<std::size_t>(node_of[r])];
                if (s < 0) continue;
                auto& o = open[static_cast<std::size_t>(s)];
                const auto code = codes[r];
                if (o.last >= 0 && code != static_cast<std::uint32_t>(o.last)) {
                    const double gr = o.g - o.gl, hr = o.h - o.hl;
                    if (o.hl >= params.min_child_weight && hr >= params.min_child_weight) {
                        const double gain =
                            0.5 * (score(o.gl, o.hl) + score(gr, hr) - score(o.g, o.h)) - params.gamma;
                        if (gain > 1e-12 && (!o.best.found || gain > o.best.gain)) {
                            const auto lo = static_cast<std::uint32_t>(o.last);
                            o.best = {true, f, lo, x.threshold(f, lo, code), gain};
                        }
                    }
                }
                o.gl += grad[r];
                o.hl += hess[r];
                o.last = code;
            }
        }

        // Split the winners and route their rows to the children.
        std::vector<Open> next;
        std::vector<std::int32_t> child_slot(open.size() * 2, -1);
        for (std::size_t s = 0; s < open.size(); ++s) {
            const auto& o = open[s];
            if (!o.best.found) continue;
            const auto left = static_cast<std::int32_t>(nodes.size());
            nodes.push_back({});
            nodes.push_back({});
            auto& node = nodes[o.node];
            node.feature = static_cast<std::int32_t>(o.best.feature);
            node.threshold = o.best.threshold;
            node.left = left;
            node.right = left + 1;
            for (std::size_t side = 0; side < 2; ++side) {
                child_slot[2 * s + side] = static_cast<std::int32_t>(next.size());
                Open child;
                child.node = static_cast<std::size_t>(left) + side;
                next.push_back(child);
            }
        }
        if (next.empty()) break;
        std::vector<std::int32_t> new_slot_of(nodes.size(), -1);
        for (std::size_t r = 0; r < n; ++r) {
            const auto s = slot_of[static_cast<std::size_t>(node_of[r])];
            if (s < 0) continue;
            const auto& o = open[static_cast<std::size_t>(s)];
            if (!o.best.found) continue;
            const bool go_left = x.code(r, o.best.feature) <= o.best.left_max;
            const auto cs = child_slot[2 * static_cast<std::size_t>(s) + (go_left ? 0 : 1)];
            auto& child = next[static_cast<std::size_t>(cs)];
            node_of[r] = static_cast<std::int32_t>(child.node);
            child.g += grad[r];
            child.h += hess[r];
        }
        for (std::size_t s = 0; s < next.size(); ++s) {
            auto& c = next[s];
            nodes[c.node].value = -c.g / (c.h + lambda) * shrinkage;
            new_slot_of[c.node] = static_cast<std::int32_t>(s);
        }
        open = std::move(next);
        slot_of = std::move(new_slot_of);
    }
    return DecisionTree(std::move(nodes));
}

RandomForest RandomForest::fit(const FeatureMatrix& train, const ForestParams& params, std::uint64_t seed,
                               bool track_importance) {
    if (train.rows() == 0) throw EmptyInput("random forest needs training rows");
    if (params.n_trees == 0) throw ConfigError("random forest needs at least one tree");
    const BinnedMatrix x(train);
    const std::size_t n = train.rows();
    const std::size_t p = train.cols();

    RandomForest rf;
    rf.n_classes_ = train.n_classes();
    rf.n_features_ = p;
    rf.trees_.reserve(params.n_trees);
    rf.oob_.reserve(params.n_trees);
    rf.coverage_.reserve(params.n_trees);
    if (track_importance) rf.importance_.assign(params.n_trees, std::vector<double>(p, 0.0));

    ClassificationTreeParams tp;
    tp.mtry = params.mtry == 0 ? default_mtry(p) : params.mtry;
    tp.min_leaf = params.min_leaf;
    tp.max_depth = params.max_depth;

    std::vector<std::uint32_t> sample(n);
    std::vector<char> drawn(n);
    for (std::size_t t = 0; t < params.n_trees; ++t) {
        Rng rng(derive_seed(seed, {t}));
        std::fill(drawn.begin(), drawn.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            sample[i] = static_cast<std::uint32_t>(params.bootstrap ? rng.index(n) : i);
            drawn[sample[i]] = 1;
        }
        std::vector<std::uint32_t> oob;
        for (std::size_t i = 0; i < n; ++i)
            if (!drawn[i]) oob.push_back(static_cast<std::uint32_t>(i));
        rf.coverage_.push_back(static_cast<double>(n - oob.size()) / static_cast<double>(n));
        rf.oob_.push_back(std::move(oob));
        rf.trees_.push_back(grow_classification_tree(x, train.labels(), rf.n_classes_, sample, tp, rng,
                                                     track_importance ? &rf.importance_[t] : nullptr));
    }
    return rf;
}

std::vector<double> RandomForest::predict_scores(std::span<const double> row) const {
    std::vector<double> votes(static_cast<std::size_t>(n_classes_), 0.0);
    for (const auto& t : trees_) votes[static_cast<std::size_t>(t.predict(row))] += 1.0;
    for (auto& v : votes) v /= static_cast<double>(trees_.size());
    return votes;
}

double RandomForest::oob_error(const FeatureMatrix& train) const {
    std::size_t wrong = 0, scored = 0;
    std::vector<std::vector<double>> votes(train.rows(), std::vector<double>(static_cast<std::size_t>(n_classes_), 0.0));
    for (std::size_t t = 0; t < trees_.size() && t < oob_.size(); ++t)
        for (auto r : oob_[t]) votes[r][static_cast<std::size_t>(trees_[t].predict(train.row(r)))] += 1.0;
    for (std::size_t r = 0; r < train.rows(); ++r) {
        const auto& v = votes[r];
        if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) continue;
        const auto best = static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
        ++scored;
        wrong += best != train.labels()[r];
    }
    return scored == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(scored);
}

}  // namespace bcbench
