#include "eja/algebra.hpp"

#include <cctype>
#include <charconv>

namespace eja {

AlgebraSpec::AlgebraSpec(AlgebraKind kind, int order, int rank, int dim,
                         std::vector<AlgebraSpec> factors)
    : kind_(kind),
      order_(order),
      rank_(rank),
      dim_(dim),
      factors_(std::make_shared<const std::vector<AlgebraSpec>>(std::move(factors))) {}

AlgebraSpec AlgebraSpec::real_vector(int n) {
    if (n < 1) throw std::invalid_argument("rn: n must be >= 1");
    return AlgebraSpec(AlgebraKind::RealVector, n, n, n, {});
}

AlgebraSpec AlgebraSpec::sym_matrix(int n) {
    if (n < 1) throw std::invalid_argument("sym: n must be >= 1");
    return AlgebraSpec(AlgebraKind::SymMatrix, n, n, n * (n + 1) / 2, {});
}

AlgebraSpec AlgebraSpec::spin_factor(int n) {
    // rank 2 needs a nonempty vector part
    if (n < 2) throw std::invalid_argument("spin: n must be >= 2");
    return AlgebraSpec(AlgebraKind::SpinFactor, n, 2, n, {});
}

AlgebraSpec AlgebraSpec::product(std::vector<AlgebraSpec> factors) {
    std::vector<AlgebraSpec> flat;
    for (auto& f : factors) {
        if (f.kind() == AlgebraKind::DirectProduct)
            flat.insert(flat.end(), f.factors().begin(), f.factors().end());
        else
            flat.push_back(std::move(f));
    }
    if (flat.size() < 2) throw std::invalid_argument("prod: at least two factors required");
    int rank = 0;
    int dim = 0;
    for (const auto& f : flat) {
        rank += f.rank();
        dim += f.dim();
    }
    return AlgebraSpec(AlgebraKind::DirectProduct, 0, rank, dim, std::move(flat));
}

std::vector<AlgebraSpec> AlgebraSpec::simple_factors() const {
    if (kind_ == AlgebraKind::DirectProduct) return *factors_;
    return {*this};
}

std::vector<int> AlgebraSpec::coord_offsets() const {
    std::vector<int> offsets;
    int off = 0;
    for (const auto& f : simple_factors()) {
        offsets.push_back(off);
        off += f.dim();
    }
    return offsets;
}

std::string AlgebraSpec::to_string() const {
    switch (kind_) {
        case AlgebraKind::RealVector: return "rn:" + std::to_string(order_);
        case AlgebraKind::SymMatrix: return "sym:" + std::to_string(order_);
        case AlgebraKind::SpinFactor: return "spin:" + std::to_string(order_);
        case AlgebraKind::DirectProduct: {
            std::string s = "prod(";
            for (std::size_t i = 0; i < factors_->size(); ++i) {
                if (i) s += ',';
                s += (*factors_)[i].to_string();
            }
            return s + ")";
        }
    }
    return {};
}

bool operator==(const AlgebraSpec& a, const AlgebraSpec& b) {
    if (a.kind_ != b.kind_ || a.order_ != b.order_) return false;
    return a.factors_ == b.factors_ || *a.factors_ == *b.factors_;
}

namespace {

class SpecParser {
public:
    explicit SpecParser(std::string_view text) : text_(text) {}

    AlgebraSpec parse_all() {
        AlgebraSpec spec = parse_one();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing characters");
        return spec;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw std::invalid_argument("bad algebra spec '" + std::string(text_) + "': " + why);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool consume(std::string_view token) {
        skip_ws();
        if (text_.substr(pos_, token.size()) == token) {
            pos_ += token.size();
            return true;
        }
        return false;
    }

    int parse_int() {
        skip_ws();
        int value = 0;
        auto first = text_.data() + pos_;
        auto last = text_.data() + text_.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr == first) fail("expected integer");
        pos_ += static_cast<std::size_t>(ptr - first);
        return value;
    }

    AlgebraSpec parse_one() {
        if (consume("prod")) {
            if (!consume("(")) fail("expected '('");
            std::vector<AlgebraSpec> factors;
            factors.push_back(parse_one());
            while (consume(",")) factors.push_back(parse_one());
            if (!consume(")")) fail("expected ')'");
            return AlgebraSpec::product(std::move(factors));
        }
        if (consume("rn:")) return AlgebraSpec::real_vector(parse_int());
        if (consume("sym:")) return AlgebraSpec::sym_matrix(parse_int());
        if (consume("spin:")) return AlgebraSpec::spin_factor(parse_int());
        fail("unknown algebra kind");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

AlgebraSpec AlgebraSpec::parse(std::string_view text) { return SpecParser(text).parse_all(); }

}  // namespace eja
