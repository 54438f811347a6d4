// Command-line front end. Exit codes: 0 success, 2 usage or input error,
// 3 corrupt artifact, 4 capacity or contract violation.

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "mdt/entropy.hpp"
#include "mdt/error.hpp"
#include "mdt/filters.hpp"
#include "mdt/hashing.hpp"
#include "mdt/serial.hpp"
#include "mdt/sketches.hpp"
#include "mdt/streammatch.hpp"
#include "mdt/text_index.hpp"

namespace {

using namespace mdt;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_all(const std::string& path) {
    if (path == "-") return std::string(std::istreambuf_iterator<char>(std::cin), {});
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_all(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
        throw UsageError("cannot write " + path);
    }
}

// Newline-delimited records; a trailing '\r' is dropped and empty lines are skipped.
std::vector<std::string> records(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

std::uint64_t parse_uint(const std::string& s) {
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) throw UsageError("not a non-negative integer: " + s);
    return v;
}

std::string fixed6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

template <typename T>
std::string serialize(const T& obj) {
    std::ostringstream out;
    serial::Writer w(out);
    obj.save(w);
    return out.str();
}

template <typename T>
T deserialize(const std::string& bytes) {
    std::istringstream in(bytes);
    serial::Reader r(in);
    T obj = T::load(r);
    r.expect(in.peek() == std::char_traits<char>::eof(), "trailing bytes after artifact");
    return obj;
}

// Artifacts holding several sketches back to back.
template <typename T>
std::string serialize_all(const std::vector<T>& items) {
    std::string out;
    for (const auto& item : items) out += serialize(item);
    return out;
}

std::uint64_t instance_seed(std::uint64_t seed, std::uint64_t i) {
    return mix64(seed + 0x9e3779b97f4a7c15ULL * (i + 1));
}

// Subcommand handlers fill in this action; main runs it after a successful parse.
std::function<int()> action;

struct EntropyOptions {
    std::string input, index_kind;
    std::size_t k = 0;
    bool show_code = false;
};

EntropyOptions entropy_opts;

void add_entropy(CLI::App& app) {
    auto* cmd = app.add_subcommand("entropy", "Empirical entropy and code lengths of a file");
    auto& o = entropy_opts;
    cmd->add_option("input", o.input, "File, or - for standard input")->required();
    cmd->add_option("-k,--k", o.k, "Highest context order reported");
    cmd->add_flag("--huffman", o.show_code, "Also print the Huffman codeword of every symbol");
    cmd->add_option("--index", o.index_kind, "Build an index and report its size")->check(CLI::IsMember({"fm", "csa"}));
    cmd->callback([] {
        action = [] {
            const auto& [input, index_kind, k, show_code] = entropy_opts;
            std::string text = read_all(input);
            if (text.empty()) throw UsageError("empty input");
            if (k > text.size()) throw UsageError("k exceeds the input length");
            FrequencyTable freqs = FrequencyTable::of(text);
            PrefixCode huffman = huffman_build(freqs);
            std::cout << "n=" << text.size() << "\n";
            std::cout << "sigma=" << freqs.sigma() << "\n";
            for (std::size_t order = 0; order <= k; ++order) {
                std::cout << "H" << order << "=" << fixed6(hk(text, order)) << "\n";
            }
            std::cout << "huffman_bits=" << huffman.encoded_length(freqs) << "\n";
            if (show_code) {
                for (const auto& [symbol, word] : huffman.codewords()) {
                    std::cout << "code\t" << unsigned(symbol) << "\t" << word << "\n";
                }
            }
            if (!index_kind.empty()) {
                std::uint64_t bits = index_kind == "fm" ? FmIndex(text).space_bits() : CsaIndex(text).space_bits();
                std::cout << "index_bits=" << bits << "\n";
                std::cout << "index_bits_per_symbol=" << fixed6(double(bits) / double(text.size())) << "\n";
            }
            return 0;
        };
    });
}

template <typename F>
int with_index(const std::string& bytes, F&& fn) {
    if (peek_index_kind(bytes) == IndexKind::fm) {
        FmIndex index = deserialize<FmIndex>(bytes);
        return fn(index);
    }
    CsaIndex index = deserialize<CsaIndex>(bytes);
    return fn(index);
}

struct IndexOptions {
    std::string kind = "fm", text, index, out;
    std::vector<std::string> patterns;
    std::uint64_t from = 0, len = 0;
};

IndexOptions index_opts;

void add_index(CLI::App& app) {
    auto* group = app.add_subcommand("index", "Build and query compressed full-text indexes");
    group->require_subcommand(1);
    auto& o = index_opts;

    auto* build = group->add_subcommand("build", "Index a text file");
    build->add_option("--kind", o.kind, "fm or csa")->check(CLI::IsMember({"fm", "csa"}));
    build->add_option("text", o.text, "Text file, or -")->required();
    build->add_option("-o,--out", o.out, "Index file to write")->required();
    build->callback([] {
        action = [] {
            std::string text = read_all(index_opts.text);
            std::string bytes;
            std::uint64_t bits = 0;
            if (index_opts.kind == "fm") {
                FmIndex index(text);
                bits = index.space_bits();
                bytes = serialize(index);
            } else {
                CsaIndex index(text);
                bits = index.space_bits();
                bytes = serialize(index);
            }
            write_all(index_opts.out, bytes);
            std::cout << "n=" << text.size() + 1 << " space_bits=" << bits << "\n";
            return 0;
        };
    });

    auto* count = group->add_subcommand("count", "Occurrence count of each pattern");
    count->add_option("index", o.index)->required();
    count->add_option("patterns", o.patterns)->required();
    count->callback([] {
        action = [] {
            return with_index(read_all(index_opts.index), [](const auto& index) {
                for (const auto& p : index_opts.patterns) std::cout << index.count(p).count() << "\n";
                return 0;
            });
        };
    });

    auto* locate = group->add_subcommand("locate", "Sorted 1-based start positions of a pattern");
    locate->add_option("index", o.index)->required();
    locate->add_option("patterns", o.patterns)->required()->expected(1);
    locate->callback([] {
        action = [] {
            return with_index(read_all(index_opts.index), [](const auto& index) {
                for (auto pos : index.locate(index_opts.patterns.front())) std::cout << pos << "\n";
                return 0;
            });
        };
    });

    auto* extract = group->add_subcommand("extract", "Raw bytes of text[from, from + len)");
    extract->add_option("index", o.index)->required();
    extract->add_option("from", o.from)->required();
    extract->add_option("len", o.len)->required();
    extract->callback([] {
        action = [] {
            return with_index(read_all(index_opts.index), [](const auto& index) {
                std::cout << index.extract(index_opts.from, index_opts.len);
                return 0;
            });
        };
    });
}

struct FilterOptions {
    std::uint64_t capacity = 0;
    double delta = 0.01, gamma = 1.0 / 256, alpha = 0.5, max_load = 0.9;
    std::string file, keys = "-", out;
};

FilterOptions filter_opts;
std::uint64_t seed = 0;

template <typename Filter>
Filter load_filter(const std::string& bytes, FilterKind expected) {
    if (peek_filter_kind(bytes) != expected) throw UsageError("filter file holds a different kind");
    return deserialize<Filter>(bytes);
}

// add, del and query for one filter type; del is omitted when remove is unsupported.
template <typename Filter>
void add_filter_actions(CLI::App& cmd, FilterKind kind, bool removable) {
    auto keyed = [&](const char* name, const char* help) {
        auto* sub = cmd.add_subcommand(name, help);
        sub->add_option("file", filter_opts.file, "Filter file")->required();
        sub->add_option("-i,--input", filter_opts.keys, "Newline-delimited keys, or -");
        return sub;
    };
    keyed("add", "Insert keys and rewrite the filter file")->callback([kind] {
        action = [kind] {
            Filter filter = load_filter<Filter>(read_all(filter_opts.file), kind);
            std::uint64_t rejected = 0;
            for (const auto& key : records(read_all(filter_opts.keys))) {
                try {
                    filter.insert(key_of(key));
                } catch (const capacity_error&) {
                    ++rejected;
                }
            }
            write_all(filter_opts.file, serialize(filter));
            if (rejected == 0) return 0;
            std::cerr << "capacity exceeded: rejected=" << rejected << "\n";
            return 4;
        };
    });
    if (removable) {
        keyed("del", "Remove keys; a key that is not present aborts without writing")->callback([kind] {
            action = [kind] {
                Filter filter = load_filter<Filter>(read_all(filter_opts.file), kind);
                if constexpr (requires { filter.remove(0); }) {
                    for (const auto& key : records(read_all(filter_opts.keys))) filter.remove(key_of(key));
                }
                write_all(filter_opts.file, serialize(filter));
                return 0;
            };
        });
    }
    keyed("query", "Print 1 or 0 per key")->callback([kind] {
        action = [kind] {
            Filter filter = load_filter<Filter>(read_all(filter_opts.file), kind);
            for (const auto& key : records(read_all(filter_opts.keys))) std::cout << (filter.contains(key_of(key)) ? 1 : 0) << "\n";
            return 0;
        };
    });
}

CLI::App* add_filter_build(CLI::App& cmd) {
    auto* build = cmd.add_subcommand("build", "Size a filter for a capacity and error rate");
    build->add_option("-m,--capacity", filter_opts.capacity, "Expected number of keys")->required()->check(CLI::PositiveNumber);
    build->add_option("-d,--delta", filter_opts.delta, "False positive rate")->check(CLI::Range(0.0, 1.0));
    build->add_option("-o,--out", filter_opts.out, "Filter file to write");
    return build;
}

void add_filter(CLI::App& app) {
    auto* group = app.add_subcommand("filter", "Approximate membership filters");
    group->require_subcommand(1);

    auto* bloom = group->add_subcommand("bloom", "Bloom filter");
    bloom->require_subcommand(1);
    add_filter_build(*bloom)->callback([] {
        action = [] {
            BloomParams p = bloom_params(filter_opts.capacity, filter_opts.delta);
            std::cout << "k=" << p.k << " M=" << p.bits << "\n";
            std::cout << "space_bits=" << p.bits << "\n";
            if (!filter_opts.out.empty()) {
                write_all(filter_opts.out, serialize(BloomFilter(filter_opts.capacity, p.k, p.bits, seed)));
            }
            return 0;
        };
    });
    add_filter_actions<BloomFilter>(*bloom, FilterKind::bloom, false);

    auto* cbf = group->add_subcommand("cbf", "Counting Bloom filter");
    cbf->require_subcommand(1);
    auto* cbf_build = add_filter_build(*cbf);
    cbf_build->add_option("--gamma", filter_opts.gamma, "Target overflow probability scale")->check(CLI::PositiveNumber);
    cbf_build->callback([] {
        action = [] {
            CountingBloomParams p = cbf_params(filter_opts.capacity, filter_opts.delta, filter_opts.gamma);
            CountingBloomFilter filter(filter_opts.capacity, p.k, p.counters, p.t, seed);
            std::cout << "k=" << p.k << " M=" << p.counters << " t=" << p.t << "\n";
            std::cout << "space_bits=" << filter.measured_space_bits() << "\n";
            if (!filter_opts.out.empty()) write_all(filter_opts.out, serialize(filter));
            return 0;
        };
    });
    add_filter_actions<CountingBloomFilter>(*cbf, FilterKind::counting_bloom, true);

    auto* qf = group->add_subcommand("qf", "Quotient filter");
    qf->require_subcommand(1);
    auto* qf_build = add_filter_build(*qf);
    qf_build->add_option("--alpha", filter_opts.alpha, "Target load factor")->check(CLI::Range(0.0, 1.0));
    qf_build->add_option("--max-load", filter_opts.max_load, "Load at which inserts are refused")->check(CLI::Range(0.0, 1.0));
    qf_build->callback([] {
        action = [] {
            QuotientParams p = qf_params(filter_opts.capacity, filter_opts.delta, filter_opts.alpha);
            QuotientFilter filter(p.q, p.r, seed, filter_opts.max_load);
            std::cout << "q=" << p.q << " r=" << p.r << "\n";
            std::cout << "space_bits=" << filter.measured_space_bits() << "\n";
            if (!filter_opts.out.empty()) write_all(filter_opts.out, serialize(filter));
            return 0;
        };
    });
    add_filter_actions<QuotientFilter>(*qf, FilterKind::quotient, true);
}

struct SketchOptions {
    std::string input = "-", sketch_out;
    std::vector<std::string> inputs;
    double epsilon = 0, delta = 0;
    unsigned k = 0;
    std::uint64_t window = 0, span = 0;
    unsigned bits = 1;
};

SketchOptions sketch_opts;

std::vector<std::uint64_t> token_keys(const std::string& text) {
    std::vector<std::uint64_t> keys;
    for (const auto& token : records(text)) keys.push_back(key_of(token));
    return keys;
}

void add_sketch(CLI::App& app) {
    auto* group = app.add_subcommand("sketch", "Streaming estimators");
    group->require_subcommand(1);

    auto* distinct = group->add_subcommand("distinct", "Distinct-token estimate (bottom-k)");
    distinct->add_option("-i,--input", sketch_opts.input, "Token per line, or -");
    distinct->add_option("--eps", sketch_opts.epsilon, "Relative error")->required()->check(CLI::Range(0.0, 1.0));
    distinct->add_option("--delta", sketch_opts.delta, "Failure probability; enables the median of independent copies")
        ->check(CLI::Range(0.0, 1.0));
    distinct->add_option("--sketch-out", sketch_opts.sketch_out, "Write the sketch state");
    distinct->callback([] {
        action = [] {
            auto keys = token_keys(read_all(sketch_opts.input));
            const unsigned copies = sketch_opts.delta > 0 ? boost_config(sketch_opts.epsilon, sketch_opts.delta, 1.0).t : 1;
            std::vector<DistinctCounter> counters;
            std::vector<double> estimates;
            for (unsigned i = 0; i < copies; ++i) {
                DistinctCounter c = DistinctCounter::for_accuracy(sketch_opts.epsilon, copies == 1 ? seed : instance_seed(seed, i));
                for (auto key : keys) c.offer(key);
                estimates.push_back(c.estimate());
                counters.push_back(std::move(c));
            }
            std::cout << fixed6(lower_median(estimates)) << "\n";
            if (!sketch_opts.sketch_out.empty()) write_all(sketch_opts.sketch_out, serialize_all(counters));
            return 0;
        };
    });

    auto* minhash = group->add_subcommand("minhash", "Jaccard estimate of two token files or sketches");
    minhash->add_option("inputs", sketch_opts.inputs, "One or two token files or serialized sketches")->required()->expected(1, 2);
    minhash->add_option("--k", sketch_opts.k, "Number of hash functions");
    minhash->add_option("--eps", sketch_opts.epsilon, "Additive error; sizes k with --delta")->check(CLI::Range(0.0, 1.0));
    minhash->add_option("--delta", sketch_opts.delta, "Failure probability")->check(CLI::Range(0.0, 1.0));
    minhash->add_option("--sketch-out", sketch_opts.sketch_out, "Write the sketch of a single input");
    minhash->callback([] {
        action = [] {
            unsigned k = sketch_opts.k;
            if (k == 0) k = minhash_k(sketch_opts.epsilon > 0 ? sketch_opts.epsilon : 0.1, sketch_opts.delta > 0 ? sketch_opts.delta : 0.05);
            std::vector<MinHash> sketches;
            for (const auto& path : sketch_opts.inputs) {
                std::string bytes = read_all(path);
                if (bytes.rfind("MDTS", 0) == 0) {
                    if (peek_sketch_kind(bytes) != SketchKind::minhash) throw UsageError(path + " is not a MinHash sketch");
                    sketches.push_back(deserialize<MinHash>(bytes));
                } else {
                    sketches.push_back(MinHash::build(token_keys(bytes), k, seed));
                }
            }
            if (sketches.size() == 2) std::cout << fixed6(sketches[0].jaccard(sketches[1])) << "\n";
            if (!sketch_opts.sketch_out.empty()) {
                if (sketches.size() != 1) throw UsageError("--sketch-out takes a single input");
                write_all(sketch_opts.sketch_out, serialize(sketches[0]));
            }
            return 0;
        };
    });

    auto* morris = group->add_subcommand("morris", "Approximate event count");
    morris->add_option("-i,--input", sketch_opts.input, "Event counts, one integer per line, or -");
    morris->add_option("--eps", sketch_opts.epsilon, "Relative error; with --delta averages independent counters")
        ->check(CLI::Range(0.0, 1.0));
    morris->add_option("--delta", sketch_opts.delta, "Failure probability")->check(CLI::Range(0.0, 1.0));
    morris->add_option("--sketch-out", sketch_opts.sketch_out, "Write the counter state");
    morris->callback([] {
        action = [] {
            std::uint64_t events = 0;
            for (const auto& line : records(read_all(sketch_opts.input))) events += parse_uint(line);
            std::vector<MorrisCounter> counters;
            double estimate = 0;
            if (sketch_opts.epsilon > 0 && sketch_opts.delta > 0) {
                // Var[2^X - 1] = n(n-1)/2, so the variance ratio is below 1/2.
                BoostConfig cfg = boost_config(sketch_opts.epsilon, sketch_opts.delta, 0.5);
                estimate = boost_mean_median(cfg, [&](std::uint64_t i) {
                    MorrisCounter c(instance_seed(seed, i));
                    c.advance(events);
                    counters.push_back(c);
                    return c.estimate();
                });
            } else {
                MorrisCounter c(seed);
                c.advance(events);
                counters.push_back(c);
                estimate = c.estimate();
            }
            std::cout << fixed6(estimate) << "\n";
            if (!sketch_opts.sketch_out.empty()) write_all(sketch_opts.sketch_out, serialize_all(counters));
            return 0;
        };
    });

    auto* dgim = group->add_subcommand("dgim", "Sliding-window count of 1-bits, or sum of small integers");
    dgim->add_option("-i,--input", sketch_opts.input, "One bit (or integer below 2^bits) per line, or -");
    dgim->add_option("--window", sketch_opts.window, "Window length")->required()->check(CLI::PositiveNumber);
    dgim->add_option("--eps", sketch_opts.epsilon, "Relative error")->required()->check(CLI::PositiveNumber);
    dgim->add_option("--span", sketch_opts.span, "Query span, at most the window; defaults to the window");
    dgim->add_option("--bits", sketch_opts.bits, "Width of each value")->check(CLI::Range(1, 63));
    dgim->add_option("--sketch-out", sketch_opts.sketch_out, "Write the window state");
    dgim->callback([] {
        action = [] {
            const std::uint64_t span = sketch_opts.span == 0 ? sketch_opts.window : sketch_opts.span;
            auto values = records(read_all(sketch_opts.input));
            DgimSum sum(sketch_opts.window, sketch_opts.epsilon, sketch_opts.bits);
            for (const auto& line : values) {
                std::uint64_t v = parse_uint(line);
                if (v >> sketch_opts.bits) throw UsageError("value exceeds --bits: " + line);
                sum.push(v);
            }
            std::cout << fixed6(double(sum.sum(span))) << "\n";
            if (!sketch_opts.sketch_out.empty()) {
                std::vector<DgimWindow> lanes;
                for (unsigned i = 0; i < sum.bits(); ++i) lanes.push_back(sum.lane(i));
                write_all(sketch_opts.sketch_out, serialize_all(lanes));
            }
            return 0;
        };
    });
}

struct StreamOptions {
    std::string pattern_file, input = "-", engine = "pp";
    unsigned k = 0;
    std::uint64_t max_stream = 1ULL << 20;
    bool keep_newline = false;
};

StreamOptions stream_opts;

// Feeds the input to push in fixed-size chunks so the stream is never held in memory.
void for_each_byte(const std::string& path, const std::function<void(std::uint8_t)>& push) {
    std::ifstream file;
    std::istream* in = &std::cin;
    if (path != "-") {
        file.open(path, std::ios::binary);
        if (!file) throw UsageError("cannot read " + path);
        in = &file;
    }
    std::vector<char> buf(1 << 16);
    while (in->read(buf.data(), static_cast<std::streamsize>(buf.size())) || in->gcount() > 0) {
        for (std::streamsize i = 0; i < in->gcount(); ++i) push(static_cast<std::uint8_t>(buf[i]));
    }
}

void add_stream(CLI::App& app) {
    auto* group = app.add_subcommand("stream", "Streaming pattern matching");
    group->require_subcommand(1);
    auto* match = group->add_subcommand("match", "Print \"end<TAB>mismatches\" for every occurrence");
    match->add_option("pattern", stream_opts.pattern_file, "File holding the pattern")->required();
    match->add_option("-i,--input", stream_opts.input, "Stream source, or - for standard input");
    match->add_option("--engine", stream_opts.engine, "kr (O(n) space) or pp (O(log n) space)")
        ->check(CLI::IsMember({"kr", "pp"}));
    match->add_option("--k", stream_opts.k, "Mismatch budget; needs the pp engine when positive");
    match->add_option("--max-stream", stream_opts.max_stream, "Bound on the stream length used to size the fingerprint prime")
        ->check(CLI::PositiveNumber);
    match->add_flag("--keep-newline", stream_opts.keep_newline, "Keep a trailing newline of the pattern file");
    match->callback([] {
        action = [] {
            std::string pattern = read_all(stream_opts.pattern_file);
            if (!stream_opts.keep_newline && !pattern.empty() && pattern.back() == '\n') {
                pattern.pop_back();
                if (!pattern.empty() && pattern.back() == '\r') pattern.pop_back();
            }
            if (pattern.empty()) throw UsageError("empty pattern");
            if (stream_opts.k > 0 && stream_opts.engine != "pp") throw UsageError("--k needs --engine pp");
            std::string out;
            auto emit = [&](std::uint64_t end, unsigned mismatches) {
                out += std::to_string(end) + "\t" + std::to_string(mismatches) + "\n";
                if (out.size() > (1 << 16)) {
                    std::cout << out;
                    out.clear();
                }
            };
            if (stream_opts.engine == "kr") {
                KrMatcher kr(pattern, stream_opts.max_stream, seed);
                for_each_byte(stream_opts.input, [&](std::uint8_t c) {
                    if (kr.push(c)) emit(kr.position(), 0);
                });
            } else {
                KMismatchMatcher km(pattern, stream_opts.k, stream_opts.max_stream, seed);
                for_each_byte(stream_opts.input, [&](std::uint8_t c) {
                    for (const auto& occ : km.push(c)) emit(occ.end, occ.mismatches);
                });
                for (const auto& occ : km.finish()) emit(occ.end, occ.mismatches);
            }
            std::cout << out;
            return 0;
        };
    });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compressed indexes, filters, sketches and streaming matchers"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--seed", seed, "Seed of every randomized structure")->envname("MDT_SEED");
    add_entropy(app);
    add_index(app);
    add_filter(app);
    add_sketch(app);
    add_stream(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    try {
        return action ? action() : 2;
    } catch (const corrupt_artifact& e) {
        std::cerr << "corrupt artifact: " << e.what() << "\n";
        return 3;
    } catch (const capacity_error& e) {
        std::cerr << "capacity exceeded: " << e.what() << "\n";
        return 4;
    } catch (const contract_violation& e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
