// File formats, hashing, and the worker pool.

#include "toricsim/io.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace toricsim {

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

void write_operator_csv(const std::string& path, const SparseOp& op) {
    if (op.rows() != op.cols())
        throw std::invalid_argument("write_operator_csv: operator must be square");
    std::ostringstream out;
    out << "# dim=" << op.rows() << "\n";
    out << "row,col,re,im\n";
    // row-major storage iterates rows ascending, columns ascending within a row
    for (int r = 0; r < op.outerSize(); ++r)
        for (SparseOp::InnerIterator it(op, r); it; ++it)
            out << it.row() << "," << it.col() << "," << format_g17(it.value().real()) << ","
                << format_g17(it.value().imag()) << "\n";
    write_text_file(path, out.str());
}

SparseOp read_operator_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_operator_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# dim=", 0) != 0)
        throw std::runtime_error("read_operator_csv: missing `# dim=` header in " + path);
    const long long dim = std::stoll(line.substr(6));
    if (dim < 1) throw std::runtime_error("read_operator_csv: bad dimension in " + path);
    std::vector<Eigen::Triplet<cplx>> trips;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("row,", 0) == 0) continue;
        std::istringstream ls(line);
        long long r, c;
        double re, im;
        char comma;
        if (!(ls >> r >> comma >> c >> comma >> re >> comma >> im))
            throw std::runtime_error("read_operator_csv: malformed line: " + line);
        if (r < 0 || r >= dim || c < 0 || c >= dim)
            throw std::runtime_error("read_operator_csv: index out of range: " + line);
        trips.emplace_back(r, c, cplx(re, im));
    }
    SparseOp op(dim, dim);
    op.setFromTriplets(trips.begin(), trips.end());
    op.makeCompressed();
    return op;
}

void write_table_csv(const std::string& path, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    for (size_t i = 0; i < columns.size(); ++i)
        out << columns[i] << (i + 1 < columns.size() ? "," : "");
    out << "\n";
    for (const auto& row : rows) {
        if (row.size() != columns.size())
            throw std::invalid_argument("write_table_csv: row width does not match header");
        for (size_t i = 0; i < row.size(); ++i)
            out << format_g17(row[i]) << (i + 1 < row.size() ? "," : "");
        out << "\n";
    }
    write_text_file(path, out.str());
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_text_file: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_text_file: cannot open " + path);
    out << content;
    if (!out) throw std::runtime_error("write_text_file: write failed for " + path);
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

int thread_count() {
    if (const char* env = std::getenv("TORICSIM_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(long long n, const std::function<void(long long)>& fn, int threads) {
    if (n <= 0) return;
    int workers = threads >= 1 ? threads : thread_count();
    if (workers > n) workers = static_cast<int>(n);
    if (workers == 1) {
        for (long long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long long> next(0);
    std::exception_ptr error = nullptr;
    std::mutex error_mutex;
    auto body = [&]() {
        for (;;) {
            const long long i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace toricsim
