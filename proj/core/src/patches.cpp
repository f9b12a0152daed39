#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "nipsr/image.hpp"
#include "nipsr/rng.hpp"

namespace nipsr {

namespace {

// Top-left anchors with the given stride; the last window is back-shifted
// so coverage reaches the border.
std::vector<int> grid_anchors(int dim, int size, int stride) {
    std::vector<int> a;
    for (int p = 0; p + size <= dim; p += stride) a.push_back(p);
    if (a.empty() || a.back() != dim - size) a.push_back(dim - size);
    return a;
}

void copy_window(const ImagePlane& src, int oy, int ox, int size, double* dst) {
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) dst[y * size + x] = src.at(oy + y, ox + x);
}

PatchSet gather(const PatchSet& ps, const std::vector<std::size_t>& sel) {
    const int size = ps.lr.h;
    PatchSet out;
    out.lr = Tensor(static_cast<int>(sel.size()), 1, size, size);
    out.hr = Tensor(static_cast<int>(sel.size()), 1, size, size);
    const std::size_t plane = static_cast<std::size_t>(size) * size;
    for (std::size_t i = 0; i < sel.size(); ++i) {
        std::copy_n(ps.lr.data.begin() + static_cast<std::ptrdiff_t>(sel[i] * plane), plane,
                    out.lr.data.begin() + static_cast<std::ptrdiff_t>(i * plane));
        std::copy_n(ps.hr.data.begin() + static_cast<std::ptrdiff_t>(sel[i] * plane), plane,
                    out.hr.data.begin() + static_cast<std::ptrdiff_t>(i * plane));
    }
    return out;
}

}  // namespace

void PatchSet::append(const PatchSet& other) {
    if (other.count() == 0) return;
    if (count() == 0) {
        *this = other;
        return;
    }
    if (lr.h != other.lr.h || lr.w != other.lr.w) {
        throw ContractError("PatchSet::append: patch size mismatch");
    }
    lr.data.insert(lr.data.end(), other.lr.data.begin(), other.lr.data.end());
    hr.data.insert(hr.data.end(), other.hr.data.begin(), other.hr.data.end());
    lr.n += other.lr.n;
    hr.n += other.hr.n;
}

PatchSet extract_patches(const ImagePlane& lr_up, const ImagePlane& hr, int size, int stride) {
    if (lr_up.h != hr.h || lr_up.w != hr.w) {
        throw ContractError("extract_patches: lr_up and hr dimensions differ");
    }
    if (size < 1 || stride < 1) throw ContractError("extract_patches: size and stride must be >= 1");
    if (hr.h < size || hr.w < size) {
        throw ContractError("extract_patches: image smaller than patch size");
    }
    const std::vector<int> ys = grid_anchors(hr.h, size, stride);
    const std::vector<int> xs = grid_anchors(hr.w, size, stride);

    PatchSet ps;
    const int m = static_cast<int>(ys.size() * xs.size());
    ps.lr = Tensor(m, 1, size, size);
    ps.hr = Tensor(m, 1, size, size);
    int i = 0;
    for (int oy : ys) {
        for (int ox : xs) {
            copy_window(lr_up, oy, ox, size, ps.lr.plane(i, 0));
            copy_window(hr, oy, ox, size, ps.hr.plane(i, 0));
            ++i;
        }
    }
    return ps;
}

PatchSet subsample_patches(const PatchSet& ps, double fraction, std::uint64_t seed) {
    if (ps.count() == 0) throw ContractError("subsample_patches: empty patch set");
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw ContractError("subsample_patches: fraction must be in (0,1]");
    }
    if (fraction == 1.0) return ps;

    const std::size_t m = static_cast<std::size_t>(ps.count());
    const std::size_t k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(m)));
    std::vector<std::size_t> indices(m);
    std::iota(indices.begin(), indices.end(), 0);
    SeededRng rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.uniform_index(m - i);
        std::swap(indices[i], indices[j]);
    }
    indices.resize(k);
    return gather(ps, indices);
}

std::vector<std::string> DatasetManifest::paths(ManifestEntry::Role role) const {
    std::vector<std::string> out;
    for (const auto& e : entries) {
        if (e.role == role) out.push_back(resolve(e.path));
    }
    return out;
}

std::string DatasetManifest::resolve(const std::string& path) const {
    const std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (std::filesystem::path(base_dir) / p).string();
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open manifest '" + path + "'");

    DatasetManifest m;
    m.base_dir = std::filesystem::path(path).parent_path().string();

    std::set<std::string> seen;
    std::string line;
    std::size_t offset = 0;
    while (std::getline(f, line)) {
        const std::size_t line_start = offset;
        offset += line.size() + 1;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ss(line);
        std::string role_str, file;
        if (!(ss >> role_str)) continue;  // blank or comment-only line
        if (!(ss >> file)) throw ParseError("manifest record missing path", line_start);
        std::string extra;
        if (ss >> extra) throw ParseError("manifest record has trailing tokens", line_start);

        ManifestEntry e;
        if (role_str == "train") {
            e.role = ManifestEntry::Role::train;
        } else if (role_str == "test") {
            e.role = ManifestEntry::Role::test;
        } else {
            throw ParseError("unknown manifest role '" + role_str + "'", line_start);
        }
        e.path = file;
        if (!seen.insert(file).second) {
            throw ParseError("duplicate manifest path '" + file + "'", line_start);
        }
        m.entries.push_back(std::move(e));
    }
    return m;
}

}  // namespace nipsr
