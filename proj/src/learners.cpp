#include "bcbench/learners.hpp"

#include "bcbench/dataset_io.hpp"
#include "bcbench/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>

namespace bcbench {

using nlohmann::json;

std::string_view to_string(LearnerKind k) {
    switch (k) {
        case LearnerKind::xgb: return "xgb";
        case LearnerKind::svm: return "svm";
        case LearnerKind::rf: return "rf";
        case LearnerKind::nn: return "nn";
    }
    return "?";
}

LearnerKind parse_learner(std::string_view s) {
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "xgb" || lower == "gbt" || lower == "1") return LearnerKind::xgb;
    if (lower == "svm" || lower == "2") return LearnerKind::svm;
    if (lower == "rf" || lower == "3") return LearnerKind::rf;
    if (lower == "nn" || lower == "mlp" || lower == "4") return LearnerKind::nn;
    throw ConfigError("unknown learner '" + std::string(s) + "'");
}

void LearnerSpec::validate() const {
    switch (kind) {
        case LearnerKind::rf:
            if (rf.n_trees < 1) throw ConfigError("rf.n_trees must be >= 1");
            if (rf.min_leaf < 1) throw ConfigError("rf.min_leaf must be >= 1");
            break;
        case LearnerKind::xgb:
            if (gbt.rounds < 1) throw ConfigError("gbt.rounds must be >= 1");
            if (gbt.max_depth < 1) throw ConfigError("gbt.max_depth must be >= 1");
            if (!(gbt.learning_rate >= 0.0)) throw ConfigError("gbt.learning_rate must be >= 0");
            if (!(gbt.lambda >= 0.0) || !(gbt.gamma >= 0.0) || !(gbt.min_child_weight >= 0.0))
                throw ConfigError("gbt.lambda, gamma and min_child_weight must be >= 0");
            break;
        case LearnerKind::svm:
            if (!(svm.c > 0.0)) throw ConfigError("svm.c must be > 0");
            if (!(svm.gamma >= 0.0)) throw ConfigError("svm.gamma must be >= 0");
            if (!(svm.tolerance > 0.0)) throw ConfigError("svm.tolerance must be > 0");
            break;
        case LearnerKind::nn:
            if (nn.hidden < 1) throw ConfigError("nn.hidden must be >= 1");
            if (!(nn.learning_rate > 0.0)) throw ConfigError("nn.learning_rate must be > 0");
            if (nn.batch_size < 1) throw ConfigError("nn.batch_size must be >= 1");
            break;
    }
}

namespace {

json hyper(const LearnerSpec& s) {
    switch (s.kind) {
        case LearnerKind::rf:
            return {{"n_trees", s.rf.n_trees}, {"mtry", s.rf.mtry == 0 ? json("floor(sqrt(p))") : json(s.rf.mtry)},
                    {"min_leaf", s.rf.min_leaf}, {"max_depth", s.rf.max_depth}, {"split", "gini"},
                    {"bootstrap", s.rf.bootstrap}};
        case LearnerKind::xgb:
            return {{"rounds", s.gbt.rounds}, {"max_depth", s.gbt.max_depth}, {"learning_rate", s.gbt.learning_rate},
                    {"lambda", s.gbt.lambda}, {"gamma", s.gbt.gamma}, {"min_child_weight", s.gbt.min_child_weight}};
        case LearnerKind::svm:
            return {{"kernel", "rbf"}, {"gamma", s.svm.gamma == 0.0 ? json("1/p") : json(s.svm.gamma)},
                    {"c", s.svm.c}, {"tolerance", s.svm.tolerance}, {"multiclass", "one-vs-one"}};
        case LearnerKind::nn:
            return {{"hidden", s.nn.hidden}, {"activation", "tanh"}, {"output", "softmax"},
                    {"learning_rate", s.nn.learning_rate}, {"epochs", s.nn.epochs}, {"batch_size", s.nn.batch_size}};
    }
    return json::object();
}

}  // namespace

std::string LearnerSpec::hyperparameters_json() const { return hyper(*this).dump(); }

TrainedModel fit(const LearnerSpec& spec, const FeatureMatrix& train) {
    spec.validate();
    if (train.rows() == 0 || train.cols() == 0) throw EmptyInput("training matrix is empty");
    for (double v : train.values())
        if (!std::isfinite(v)) throw NumericError("non-finite feature value in training matrix");
    const auto& y = train.labels();
    if (std::adjacent_find(y.begin(), y.end(), std::not_equal_to<>()) == y.end())
        throw InvalidLabels("training labels contain a single class");

    TrainedModel m;
    m.kind = spec.kind;
    m.n_classes = train.n_classes();
    m.class_level = train.class_level();
    m.columns = train.column_names();
    switch (spec.kind) {
        case LearnerKind::rf: m.model = RandomForest::fit(train, spec.rf, spec.seed); break;
        case LearnerKind::xgb: m.model = GbtModel::fit(train, spec.gbt); break;
        case LearnerKind::svm: m.model = SvmModel::fit(train, spec.svm); break;
        case LearnerKind::nn: m.model = MlpModel::fit(train, spec.nn, spec.seed); break;
    }
    return m;
}

std::vector<double> predict_row_scores(const TrainedModel& model, std::span<const double> row) {
    if (row.size() != model.columns.size()) throw SchemaError("row width differs from the model's columns");
    return std::visit([&](const auto& m) { return m.predict_scores(row); }, model.model);
}

std::vector<std::vector<double>> predict_scores(const TrainedModel& model, const FeatureMatrix& rows) {
    if (rows.column_names() != model.columns) throw SchemaError("column signature differs from the trained model");
    std::vector<std::vector<double>> out;
    out.reserve(rows.rows());
    for (std::size_t r = 0; r < rows.rows(); ++r) out.push_back(predict_row_scores(model, rows.row(r)));
    return out;
}

int argmax(std::span<const double> scores) {
    return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

std::vector<int> predict_labels(const TrainedModel& model, const FeatureMatrix& rows) {
    std::vector<int> out;
    for (const auto& s : predict_scores(model, rows)) out.push_back(argmax(s));
    return out;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

constexpr int kModelFormatVersion = 1;

json tree_json(const DecisionTree& t) {
    json f = json::array(), th = json::array(), l = json::array(), r = json::array(), v = json::array();
    for (const auto& n : t.nodes()) {
        f.push_back(n.feature);
        th.push_back(n.threshold);
        l.push_back(n.left);
        r.push_back(n.right);
        v.push_back(n.value);
    }
    return {{"feature", f}, {"threshold", th}, {"left", l}, {"right", r}, {"value", v}};
}

DecisionTree tree_from(const json& j) {
    const auto& f = j.at("feature");
    std::vector<TreeNode> nodes(f.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        nodes[i].feature = f[i].get<std::int32_t>();
        nodes[i].threshold = j.at("threshold")[i].get<double>();
        nodes[i].left = j.at("left")[i].get<std::int32_t>();
        nodes[i].right = j.at("right")[i].get<std::int32_t>();
        nodes[i].value = j.at("value")[i].get<double>();
    }
    for (const auto& n : nodes)
        if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || static_cast<std::size_t>(n.left) >= nodes.size() ||
                               static_cast<std::size_t>(n.right) >= nodes.size()))
            throw ParseError("tree node points outside the tree");
    if (nodes.empty()) throw ParseError("empty tree");
    return DecisionTree(std::move(nodes));
}

json scaler_json(const Standardizer& s) { return {{"mean", s.mean}, {"sd", s.sd}}; }
Standardizer scaler_from(const json& j) {
    Standardizer s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.sd = j.at("sd").get<std::vector<double>>();
    return s;
}

}  // namespace

std::string model_to_json(const TrainedModel& model) {
    json doc = {{"format", "bcbench-model"},
                {"version", kModelFormatVersion},
                {"kind", to_string(model.kind)},
                {"n_classes", model.n_classes},
                {"class_level", model.class_level},
                {"columns", model.columns}};
    json body;
    if (const auto* rf = std::get_if<RandomForest>(&model.model)) {
        json trees = json::array();
        for (const auto& t : rf->trees()) trees.push_back(tree_json(t));
        body = {{"trees", trees}, {"n_features", rf->n_features()}};
    } else if (const auto* g = std::get_if<GbtModel>(&model.model)) {
        json rounds = json::array();
        for (const auto& round : g->rounds()) {
            json trees = json::array();
            for (const auto& t : round) trees.push_back(tree_json(t));
            rounds.push_back(trees);
        }
        body = {{"base", g->base()}, {"rounds", rounds}};
    } else if (const auto* s = std::get_if<SvmModel>(&model.model)) {
        json machines = json::array();
        for (const auto& m : s->machines)
            machines.push_back({{"positive", m.positive},
                                {"negative", m.negative},
                                {"rho", m.rho},
                                {"coef", m.coef},
                                {"support", m.support}});
        body = {{"gamma", s->gamma}, {"scaler", scaler_json(s->scaler)}, {"machines", machines}};
    } else if (const auto* n = std::get_if<MlpModel>(&model.model)) {
        body = {{"inputs", n->net.inputs()},
                {"hidden", n->net.hidden()},
                {"classes", n->net.classes()},
                {"parameters", n->net.parameters()},
                {"scaler", scaler_json(n->scaler)}};
    }
    doc["model"] = body;
    return doc.dump() + "\n";
}

TrainedModel model_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model document: ") + e.what());
    }
    try {
        if (doc.at("format") != "bcbench-model") throw ParseError("not a model document");
        if (doc.at("version").get<int>() != kModelFormatVersion)
            throw ParseError("unsupported model version " + doc.at("version").dump());
        TrainedModel m;
        m.kind = parse_learner(doc.at("kind").get<std::string>());
        m.n_classes = doc.at("n_classes").get<int>();
        m.class_level = doc.at("class_level").get<int>();
        m.columns = doc.at("columns").get<std::vector<std::string>>();
        const auto& b = doc.at("model");
        switch (m.kind) {
            case LearnerKind::rf: {
                std::vector<DecisionTree> trees;
                for (const auto& t : b.at("trees")) trees.push_back(tree_from(t));
                m.model = RandomForest(std::move(trees), m.n_classes, b.at("n_features").get<std::size_t>());
                break;
            }
            case LearnerKind::xgb: {
                std::vector<std::vector<DecisionTree>> rounds;
                for (const auto& round : b.at("rounds")) {
                    std::vector<DecisionTree> trees;
                    for (const auto& t : round) trees.push_back(tree_from(t));
                    rounds.push_back(std::move(trees));
                }
                m.model = GbtModel(b.at("base").get<std::vector<double>>(), std::move(rounds));
                break;
            }
            case LearnerKind::svm: {
                SvmModel s;
                s.n_classes = m.n_classes;
                s.gamma = b.at("gamma").get<double>();
                s.scaler = scaler_from(b.at("scaler"));
                for (const auto& j : b.at("machines")) {
                    BinarySvm bs;
                    bs.positive = j.at("positive").get<int>();
                    bs.negative = j.at("negative").get<int>();
                    bs.rho = j.at("rho").get<double>();
                    bs.coef = j.at("coef").get<std::vector<double>>();
                    bs.support = j.at("support").get<std::vector<std::vector<double>>>();
                    s.machines.push_back(std::move(bs));
                }
                m.model = std::move(s);
                break;
            }
            case LearnerKind::nn: {
                MlpModel n;
                n.scaler = scaler_from(b.at("scaler"));
                n.net = Mlp(b.at("inputs").get<std::size_t>(), b.at("hidden").get<std::size_t>(),
                            b.at("classes").get<std::size_t>());
                auto params = b.at("parameters").get<std::vector<double>>();
                if (params.size() != n.net.parameters().size()) throw ParseError("network parameter count mismatch");
                n.net.parameters() = std::move(params);
                m.model = std::move(n);
                break;
            }
        }
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("model document: ") + e.what());
    }
}

void save_model(const TrainedModel& model, const std::string& path) { write_text_file(path, model_to_json(model)); }

TrainedModel load_model(const std::string& path) { return model_from_json(read_text_file(path)); }

}  // namespace bcbench
