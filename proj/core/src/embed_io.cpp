#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "codemix/embed.hpp"
#include "codemix/error.hpp"

namespace codemix::embed {

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

std::vector<std::string_view> split_spaces(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && line[pos] == ' ') {
            ++pos;
        }
        std::size_t start = pos;
        while (pos < line.size() && line[pos] != ' ') {
            ++pos;
        }
        if (pos > start) {
            out.push_back(line.substr(start, pos - start));
        }
    }
    return out;
}

double parse_double(std::string_view text, const std::string& where) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        fail("DimensionMismatch", where + ": '" + std::string(text) + "' is not a number");
    }
    return v;
}

} // namespace

void save_embeddings(const EmbeddingMatrix& emb, const std::string& path) {
    emb.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail("FileNotFound", "cannot write embeddings: " + path);
    }
    out << emb.vocab.size() << ' ' << emb.dim << '\n';
    for (int r = 0; r < emb.vocab.size(); ++r) {
        out << emb.vocab.token_at(r);
        for (int c = 0; c < emb.dim; ++c) {
            out << ' ' << format_double(emb.vectors(r, c));
        }
        out << '\n';
    }
    if (!out) {
        fail("FileNotFound", "short write on embeddings: " + path);
    }
}

EmbeddingMatrix load_embeddings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail("FileNotFound", "cannot open embeddings: " + path);
    }

    std::string line;
    if (!std::getline(in, line)) {
        fail("MalformedHeader", path + ": missing header line");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    auto header = split_spaces(line);
    long long v_count = 0, dim = 0;
    if (header.size() != 2 ||
        std::from_chars(header[0].data(), header[0].data() + header[0].size(), v_count).ec != std::errc{} ||
        std::from_chars(header[1].data(), header[1].data() + header[1].size(), dim).ec != std::errc{} ||
        v_count <= 0 || dim <= 0) {
        fail("MalformedHeader", path + ": header must be two positive integers `V d`");
    }

    std::vector<std::string> tokens;
    tokens.reserve(static_cast<std::size_t>(v_count));
    Eigen::MatrixXd vectors(v_count, dim);
    long long row = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (row >= v_count) {
            fail("TokenCountMismatch", path + ": more rows than the header's " + std::to_string(v_count));
        }
        const std::string where = path + ":" + std::to_string(line_no);
        auto fields = split_spaces(line);
        if (static_cast<long long>(fields.size()) != dim + 1) {
            fail("DimensionMismatch", where + ": expected token plus " + std::to_string(dim) + " values, got " +
                                          std::to_string(fields.size() - 1));
        }
        tokens.emplace_back(fields[0]);
        for (long long c = 0; c < dim; ++c) {
            vectors(row, c) = parse_double(fields[static_cast<std::size_t>(c) + 1], where);
        }
        ++row;
    }
    if (row != v_count) {
        fail("TokenCountMismatch",
             path + ": header says " + std::to_string(v_count) + " rows, file has " + std::to_string(row));
    }

    EmbeddingMatrix emb;
    emb.dim = static_cast<int>(dim);
    const bool has_reserved = tokens.size() >= 2 && tokens[0] == Vocabulary::kPadToken &&
                              tokens[1] == Vocabulary::kUnkToken;
    if (has_reserved) {
        emb.vocab = Vocabulary::from_ordered_tokens(tokens);
        emb.vectors = std::move(vectors);
    } else {
        // Third-party file: prepend the reserved rows (<pad> zeros, <unk> the
        // mean vector).
        std::vector<std::string> with_reserved;
        with_reserved.reserve(tokens.size() + 2);
        with_reserved.push_back(Vocabulary::kPadToken);
        with_reserved.push_back(Vocabulary::kUnkToken);
        with_reserved.insert(with_reserved.end(), tokens.begin(), tokens.end());
        emb.vocab = Vocabulary::from_ordered_tokens(with_reserved);
        emb.vectors = Eigen::MatrixXd::Zero(v_count + 2, dim);
        emb.vectors.row(1) = vectors.colwise().mean();
        emb.vectors.bottomRows(v_count) = vectors;
    }
    emb.validate();
    return emb;
}

} // namespace codemix::embed
