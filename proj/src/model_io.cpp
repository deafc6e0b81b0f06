#include "damf/model_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "damf/error.hpp"
#include "damf/numfmt.hpp"

namespace damf {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::BadModelFile, what); }

class Writer {
public:
    Writer& word(std::string_view w) {
        sep();
        out_ << w;
        return *this;
    }
    Writer& num(double v) { return word(format_exact(v)); }
    Writer& count(std::size_t v) { return word(std::to_string(v)); }
    Writer& integer(long long v) { return word(std::to_string(v)); }
    void line() {
        out_ << '\n';
        fresh_ = true;
    }
    std::string str() const { return out_.str(); }

private:
    void sep() {
        if (!fresh_) {
            out_ << ' ';
        }
        fresh_ = false;
    }
    std::ostringstream out_;
    bool fresh_ = true;
};

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    std::string_view word() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
        if (pos_ >= text_.size()) {
            bad("unexpected end of model file");
        }
        const std::size_t begin = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
        return text_.substr(begin, pos_ - begin);
    }
    void expect(std::string_view w) {
        const std::string_view got = word();
        if (got != w) {
            bad("expected '" + std::string(w) + "', found '" + std::string(got) + "'");
        }
    }
    double num() {
        const std::string_view w = word();
        const auto v = parse_double(w);
        if (!v) {
            bad("bad number '" + std::string(w) + "'");
        }
        return *v;
    }
    long long integer() {
        const double v = num();
        if (v != static_cast<double>(static_cast<long long>(v))) {
            bad("expected an integer");
        }
        return static_cast<long long>(v);
    }
    std::size_t count(std::size_t limit = 1u << 28) {
        const long long v = integer();
        if (v < 0 || static_cast<std::size_t>(v) > limit) {
            bad("count out of range");
        }
        return static_cast<std::size_t>(v);
    }
    bool done() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
        return pos_ >= text_.size();
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

void write_scaler(Writer& w, std::string_view tag, const ScalerParams& s) {
    w.word(tag).count(s.width()).num(s.bounds.low).num(s.bounds.high);
    w.line();
    for (std::size_t c = 0; c < s.width(); ++c) {
        w.num(s.min[c]).num(s.max[c]).count(c < s.passthrough.size() ? s.passthrough[c] : 0);
        w.line();
    }
}

ScalerParams read_scaler(Reader& r, std::string_view tag) {
    r.expect(tag);
    ScalerParams s;
    const std::size_t n = r.count();
    s.bounds.low = r.num();
    s.bounds.high = r.num();
    s.min.resize(n);
    s.max.resize(n);
    s.passthrough.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
        s.min[c] = r.num();
        s.max[c] = r.num();
        s.passthrough[c] = static_cast<std::uint8_t>(r.count(1));
    }
    return s;
}

void write_tree_node(Writer& w, const DecisionTree& t, std::size_t i) {
    const TreeNode& n = t.nodes()[i];
    if (n.is_leaf()) {
        w.word("L").num(n.weight);
        w.line();
        return;
    }
    w.word("S").integer(n.feature).num(n.threshold);
    w.line();
    write_tree_node(w, t, static_cast<std::size_t>(n.left));
    write_tree_node(w, t, static_cast<std::size_t>(n.right));
}

std::int32_t read_tree_node(Reader& r, std::vector<TreeNode>& nodes, std::size_t n_features, std::size_t budget) {
    if (nodes.size() >= budget) {
        bad("tree has more nodes than declared");
    }
    const auto index = static_cast<std::int32_t>(nodes.size());
    nodes.emplace_back();
    const std::string_view kind = r.word();
    if (kind == "L") {
        nodes[static_cast<std::size_t>(index)].weight = r.num();
        return index;
    }
    if (kind != "S") {
        bad("unknown node kind '" + std::string(kind) + "'");
    }
    const std::size_t feature = r.count();
    if (feature >= n_features) {
        bad("split feature out of range");
    }
    const double threshold = r.num();
    const std::int32_t left = read_tree_node(r, nodes, n_features, budget);
    const std::int32_t right = read_tree_node(r, nodes, n_features, budget);
    TreeNode& node = nodes[static_cast<std::size_t>(index)];
    node.feature = static_cast<std::int32_t>(feature);
    node.threshold = threshold;
    node.left = left;
    node.right = right;
    return index;
}

void write_ensemble(Writer& w, const Ensemble& m) {
    w.word("ensemble").word(to_string(m.variant)).num(m.base_score).num(m.learning_rate).count(m.n_features);
    w.line();
    if (const auto* b = std::get_if<BundleMap>(&m.transform)) {
        w.word("transform").word("bundles").count(b->source_count).count(b->bundles.size());
        w.line();
        for (const auto& bundle : b->bundles) {
            w.word("bundle").count(bundle.members.size());
            for (const auto& mem : bundle.members) {
                w.count(mem.source).num(mem.offset).num(mem.min_value).num(mem.max_value);
            }
            w.line();
        }
    } else if (const auto* c = std::get_if<CategoricalEncoding>(&m.transform)) {
        w.word("transform").word("categorical").num(c->prior).num(c->prior_strength).count(c->slots.size());
        w.line();
        for (const auto& slot : c->slots) {
            w.word("slot").count(slot.column).count(slot.stats.size());
            for (const auto& [cat, stat] : slot.stats) {
                w.num(cat).num(stat.first).num(stat.second);
            }
            w.line();
        }
    } else {
        w.word("transform").word("none");
        w.line();
    }
    w.word("trees").count(m.trees.size());
    w.line();
    for (const DecisionTree& t : m.trees) {
        w.word("tree").count(t.nodes().size());
        w.line();
        write_tree_node(w, t, 0);
    }
}

Ensemble read_ensemble_body(Reader& r) {
    Ensemble m;
    if (!parse_variant(r.word(), m.variant)) {
        bad("unknown ensemble variant");
    }
    m.base_score = r.num();
    m.learning_rate = r.num();
    m.n_features = r.count();
    r.expect("transform");
    const std::string_view kind = r.word();
    std::size_t width = m.n_features;
    if (kind == "bundles") {
        BundleMap b;
        b.source_count = r.count();
        const std::size_t nb = r.count();
        for (std::size_t k = 0; k < nb; ++k) {
            r.expect("bundle");
            BundleMap::Bundle bundle;
            const std::size_t nm = r.count();
            if (nm == 0) {
                bad("empty bundle");
            }
            for (std::size_t j = 0; j < nm; ++j) {
                BundleMap::Member mem;
                mem.source = r.count();
                if (mem.source >= b.source_count) {
                    bad("bundle member out of range");
                }
                mem.offset = r.num();
                mem.min_value = r.num();
                mem.max_value = r.num();
                bundle.members.push_back(mem);
            }
            b.bundles.push_back(std::move(bundle));
        }
        width = b.bundled_count();
        m.transform = std::move(b);
    } else if (kind == "categorical") {
        CategoricalEncoding c;
        c.prior = r.num();
        c.prior_strength = r.num();
        const std::size_t ns = r.count();
        for (std::size_t k = 0; k < ns; ++k) {
            r.expect("slot");
            CategoricalEncoding::Slot slot;
            slot.column = r.count();
            if (slot.column >= m.n_features) {
                bad("categorical slot out of range");
            }
            const std::size_t nc = r.count();
            for (std::size_t j = 0; j < nc; ++j) {
                const double cat = r.num();
                const double sum = r.num();
                const double cnt = r.num();
                slot.stats[cat] = {sum, cnt};
            }
            c.slots.push_back(std::move(slot));
        }
        m.transform = std::move(c);
    } else if (kind != "none") {
        bad("unknown transform '" + std::string(kind) + "'");
    }
    r.expect("trees");
    const std::size_t nt = r.count();
    m.trees.reserve(nt);
    for (std::size_t k = 0; k < nt; ++k) {
        r.expect("tree");
        const std::size_t nn = r.count();
        DecisionTree t;
        std::vector<TreeNode>& nodes = t.mutable_nodes();
        nodes.clear();
        read_tree_node(r, nodes, width, nn);
        if (nodes.size() != nn) {
            bad("tree node count mismatch");
        }
        m.trees.push_back(std::move(t));
    }
    return m;
}

void write_block(Writer& w, const double* p, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        w.num(p[k]);
        if (k % 16 == 15) {
            w.line();
        }
    }
    w.line();
}

void read_block(Reader& r, double* p, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        p[k] = r.num();
    }
}

template <typename Weights>
void write_weights(Writer& w, Weights& weights) {
    const auto blocks = weights.parameter_blocks();
    const auto sizes = weights.block_sizes();
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        write_block(w, blocks[k], sizes[k]);
    }
}

template <typename Weights>
void read_weights(Reader& r, Weights& weights) {
    const auto blocks = weights.parameter_blocks();
    const auto sizes = weights.block_sizes();
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        read_block(r, blocks[k], sizes[k]);
    }
}

void write_lstm(Writer& w, const LstmFfecModel& m) {
    LstmFfecModel copy = m;
    w.word("lstm_ffec").count(m.lag_depth).count(m.exogenous).count(m.lstm.input_size()).count(m.lstm.hidden_size());
    w.count(m.ffec.input_size())
        .count(static_cast<std::size_t>(m.ffec.W1.rows()))
        .count(static_cast<std::size_t>(m.ffec.W2.rows()));
    w.line();
    write_weights(w, copy.lstm);
    write_weights(w, copy.ffec);
}

LstmFfecModel read_lstm_body(Reader& r) {
    LstmFfecModel m;
    m.lag_depth = r.count(4096);
    m.exogenous = r.count(4096);
    const std::size_t input = r.count(4096);
    const std::size_t hidden = r.count(4096);
    const std::size_t f_in = r.count(4096);
    const std::size_t l1 = r.count(4096);
    const std::size_t l2 = r.count(4096);
    if (input != m.exogenous + 3 || f_in != m.lag_depth + 1) {
        bad("network dimensions disagree with the dataset layout");
    }
    m.lstm = LstmWeights(input, hidden);
    m.ffec = FfecWeights(f_in, l1, l2);
    read_weights(r, m.lstm);
    read_weights(r, m.ffec);
    return m;
}

}  // namespace

std::string serialize_ensemble(const Ensemble& model) {
    Writer w;
    write_ensemble(w, model);
    return w.str();
}

Ensemble parse_ensemble(std::string_view text) {
    Reader r(text);
    r.expect("ensemble");
    Ensemble m = read_ensemble_body(r);
    if (!r.done()) {
        bad("trailing content after ensemble");
    }
    return m;
}

std::string serialize_model(const ModelFile& model) {
    Writer w;
    w.word("damf-model").integer(kModelFormatVersion);
    w.line();
    w.word("model").word(model.model_name);
    w.line();
    w.word("window").integer(model.window_days);
    w.line();
    w.word("month").word(format_year_month(model.month));
    w.line();
    w.word("lag_depth").count(model.lag_depth);
    w.line();
    w.word("features").count(model.feature_names.size());
    for (const auto& name : model.feature_names) {
        w.word(name);
    }
    w.line();
    w.word("categorical").count(model.categorical_slots.size());
    for (std::size_t c : model.categorical_slots) {
        w.count(c);
    }
    w.line();
    write_scaler(w, "feature_scaler", model.feature_scaler);
    write_scaler(w, "target_scaler", model.target_scaler);
    if (const auto* e = std::get_if<Ensemble>(&model.body)) {
        write_ensemble(w, *e);
    } else if (const auto* l = std::get_if<LstmFfecModel>(&model.body)) {
        write_lstm(w, *l);
    } else {
        w.word("naive");
        w.line();
    }
    w.word("end");
    w.line();
    return w.str();
}

ModelFile parse_model(std::string_view text) {
    Reader r(text);
    r.expect("damf-model");
    if (r.integer() != kModelFormatVersion) {
        bad("unsupported model format version");
    }
    ModelFile m;
    r.expect("model");
    m.model_name = std::string(r.word());
    r.expect("window");
    m.window_days = static_cast<int>(r.integer());
    r.expect("month");
    const std::string_view month = r.word();
    if (!parse_year_month(month, m.month)) {
        bad("bad month '" + std::string(month) + "'");
    }
    r.expect("lag_depth");
    m.lag_depth = r.count(4096);
    r.expect("features");
    const std::size_t nf = r.count(1u << 16);
    for (std::size_t k = 0; k < nf; ++k) {
        m.feature_names.emplace_back(r.word());
    }
    r.expect("categorical");
    const std::size_t nc = r.count(nf);
    for (std::size_t k = 0; k < nc; ++k) {
        m.categorical_slots.push_back(r.count(nf));
    }
    m.feature_scaler = read_scaler(r, "feature_scaler");
    m.target_scaler = read_scaler(r, "target_scaler");
    const std::string_view kind = r.word();
    if (kind == "ensemble") {
        m.body = read_ensemble_body(r);
    } else if (kind == "lstm_ffec") {
        m.body = read_lstm_body(r);
    } else if (kind != "naive") {
        bad("unknown model body '" + std::string(kind) + "'");
    }
    r.expect("end");
    return m;
}

void write_model(const ModelFile& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::OutputUnwritable, "cannot write " + path.string());
    }
    out << serialize_model(model);
    if (!out) {
        throw Error(ErrorCode::OutputUnwritable, "write failed for " + path.string());
    }
}

ModelFile read_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::FileUnreadable, "cannot read " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

}  // namespace damf
