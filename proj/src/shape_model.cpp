#include "shapecomplete/shape_model.hpp"

#include "shapecomplete/error.hpp"

#include <Eigen/Dense>
#include <Eigen/QR>

#include <cstring>
#include <fstream>
#include <limits>

namespace shapecomplete {

Ssm::Ssm(Eigen::VectorXd mean, Eigen::MatrixXd modes, Eigen::VectorXd std_devs, std::vector<Face> faces,
         std::size_t training_count)
    : mean_(std::move(mean)), modes_(std::move(modes)), std_devs_(std::move(std_devs)), faces_(std::move(faces)),
      training_count_(training_count)
{
    if (mean_.size() % 3 != 0 || mean_.size() < 9)
        throw FormatError("SSM mean must hold 3N coordinates with N >= 3");
    if (modes_.rows() != mean_.size())
        throw FormatError("SSM mode matrix has " + std::to_string(modes_.rows()) + " rows, expected " +
                          std::to_string(mean_.size()));
    if (std_devs_.size() != modes_.cols())
        throw FormatError("SSM needs one standard deviation per mode");
    if (training_count_ < 1 || mode_count() + 1 > training_count_)
        throw FormatError("SSM with " + std::to_string(mode_count()) + " modes needs at least " +
                          std::to_string(mode_count() + 1) + " training shapes");
    for (Eigen::Index j = 0; j < std_devs_.size(); ++j)
    {
        if (!(std_devs_[j] >= 0.0))
            throw FormatError("SSM standard deviations must be nonnegative");
        if (j > 0 && std_devs_[j] > std_devs_[j - 1])
            throw FormatError("SSM standard deviations must be nonincreasing");
    }
    if (modes_.cols() > 0)
    {
        const Eigen::MatrixXd gram = modes_.transpose() * modes_;
        const double err = (gram - Eigen::MatrixXd::Identity(modes_.cols(), modes_.cols())).cwiseAbs().maxCoeff();
        if (!(err <= 1e-8))
            throw FormatError("SSM modes are not orthonormal (error " + std::to_string(err) + ")");
    }
    // Validates the connectivity against the vertex count.
    (void)mean_mesh();
}

TriMesh Ssm::mean_mesh() const
{
    std::vector<Point3> verts(vertex_count());
    for (std::size_t i = 0; i < verts.size(); ++i)
        verts[i] = mean_.segment<3>(3 * i);
    return TriMesh(std::move(verts), faces_);
}

Eigen::VectorXd ModeCoefficients::normalized(const Ssm& ssm) const
{
    if (b.size() != ssm.std_devs().size())
        throw TopologyError("coefficient count does not match the model");
    Eigen::VectorXd out(b.size());
    for (Eigen::Index j = 0; j < b.size(); ++j)
        out[j] = ssm.std_devs()[j] > 0.0 ? b[j] / ssm.std_devs()[j] : 0.0;
    return out;
}

Ssm build_ssm(std::span<const TriMesh> meshes)
{
    if (meshes.size() < 2)
        throw ConfigError("build_ssm needs at least 2 shapes, got " + std::to_string(meshes.size()));
    for (std::size_t s = 1; s < meshes.size(); ++s)
        require_same_topology(meshes[0], meshes[s], "build_ssm shape " + std::to_string(s));

    const auto shapes = static_cast<Eigen::Index>(meshes.size());
    const auto dim = static_cast<Eigen::Index>(3 * meshes[0].vertex_count());

    Eigen::MatrixXd data(dim, shapes);
    for (Eigen::Index s = 0; s < shapes; ++s)
        data.col(s) = meshes[s].coordinates();

    const Eigen::VectorXd mean = data.rowwise().sum() / static_cast<double>(shapes);
    const double mean_sq_norm = data.colwise().squaredNorm().sum() / static_cast<double>(shapes);
    data.colwise() -= mean;

    // Snapshot covariance: eigenvectors v of D^T D / (S-1) lift to modes D v.
    const Eigen::MatrixXd gram = (data.transpose() * data) / static_cast<double>(shapes - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success)
        throw SingularError("eigen-decomposition of the Gram matrix failed");

    const Eigen::VectorXd& values = eig.eigenvalues();
    const double largest = values.size() ? values[values.size() - 1] : 0.0;
    const double floor = std::max(zero_variance_threshold * largest, 1e-24 * mean_sq_norm);

    std::vector<Eigen::Index> kept;
    for (Eigen::Index j = values.size() - 1; j >= 0; --j)
        if (values[j] > floor && values[j] > 0.0)
            kept.push_back(j);
    const auto k = static_cast<Eigen::Index>(kept.size());

    Eigen::MatrixXd lifted(dim, k);
    Eigen::VectorXd sigma(k);
    for (Eigen::Index m = 0; m < k; ++m)
    {
        const double lambda = values[kept[m]];
        lifted.col(m) = data * eig.eigenvectors().col(kept[m]) / std::sqrt(static_cast<double>(shapes - 1) * lambda);
        sigma[m] = std::sqrt(lambda);
    }

    Eigen::MatrixXd modes(dim, k);
    if (k > 0)
    {
        // Small eigenvalues lose orthogonality in the lift; a QR pass restores it
        // while staying within rounding of the lifted vectors.
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(lifted);
        modes = qr.householderQ() * Eigen::MatrixXd::Identity(dim, k);
        const Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        for (Eigen::Index m = 0; m < k; ++m)
            if (r(m, m) < 0.0)
                modes.col(m) = -modes.col(m);
    }
    for (Eigen::Index m = 0; m < k; ++m)
    {
        Eigen::Index arg = 0;
        modes.col(m).cwiseAbs().maxCoeff(&arg);
        if (modes(arg, m) < 0.0)
            modes.col(m) = -modes.col(m);
    }

    return Ssm(mean, std::move(modes), std::move(sigma), meshes[0].faces(), meshes.size());
}

ModeCoefficients project_full(const Ssm& ssm, const TriMesh& mesh)
{
    if (mesh.vertex_count() != ssm.vertex_count() || mesh.faces() != ssm.faces())
        throw TopologyError("project_full: mesh topology does not match the model template");
    return ModeCoefficients{ssm.modes().transpose() * (mesh.coordinates() - ssm.mean())};
}

ModeCoefficients project_partial(const Ssm& ssm, std::span<const Point3> known_points, const VertexMask& known,
                                 double tikhonov)
{
    if (known.size() != ssm.vertex_count())
        throw TopologyError("project_partial: mask size does not match the model");
    const std::vector<int> idx = known.indices();
    if (idx.empty())
        throw ConfigError("project_partial: known region is empty");
    if (known_points.size() != idx.size())
        throw TopologyError("project_partial: " + std::to_string(known_points.size()) + " points for " +
                            std::to_string(idx.size()) + " known vertices");
    if (!(tikhonov >= 0.0))
        throw ConfigError("project_partial: tikhonov weight must be >= 0");

    const auto k = static_cast<Eigen::Index>(ssm.mode_count());
    if (k == 0)
        return ModeCoefficients{Eigen::VectorXd(0)};

    const auto rows = static_cast<Eigen::Index>(3 * idx.size());
    const bool regularized = tikhonov > 0.0;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows + (regularized ? k : 0), k);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(a.rows());
    for (std::size_t i = 0; i < idx.size(); ++i)
    {
        const Eigen::Index src = 3 * idx[i];
        const auto dst = static_cast<Eigen::Index>(3 * i);
        a.middleRows(dst, 3) = ssm.modes().middleRows(src, 3);
        rhs.segment<3>(dst) = known_points[i] - ssm.mean().segment<3>(src);
    }
    if (regularized)
        for (Eigen::Index j = 0; j < k; ++j)
        {
            const double sd = ssm.std_devs()[j];
            a(rows + j, j) = sd > 0.0 ? std::sqrt(tikhonov) / sd : 0.0;
        }

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    return ModeCoefficients{cod.solve(rhs)};
}

ModeCoefficients project_partial(const Ssm& ssm, const TriMesh& partial, const VertexMask& known, double tikhonov)
{
    if (partial.vertex_count() == ssm.vertex_count())
    {
        if (partial.faces() != ssm.faces())
            throw TopologyError("project_partial: prior connectivity does not match the model template");
        std::vector<Point3> pts;
        for (int i : known.indices())
            pts.push_back(partial.vertex(i));
        return project_partial(ssm, pts, known, tikhonov);
    }
    if (partial.vertex_count() == known.count())
        return project_partial(ssm, partial.vertices(), known, tikhonov);
    throw TopologyError("project_partial: prior has " + std::to_string(partial.vertex_count()) +
                        " vertices; expected the template's " + std::to_string(ssm.vertex_count()) +
                        " or the " + std::to_string(known.count()) + " known vertices");
}

TriMesh synthesize(const Ssm& ssm, const ModeCoefficients& coeffs)
{
    if (static_cast<std::size_t>(coeffs.b.size()) != ssm.mode_count())
        throw TopologyError("synthesize: " + std::to_string(coeffs.b.size()) + " coefficients for " +
                            std::to_string(ssm.mode_count()) + " modes");
    const Eigen::VectorXd x = ssm.mean() + ssm.modes() * coeffs.b;
    std::vector<Point3> verts(ssm.vertex_count());
    for (std::size_t i = 0; i < verts.size(); ++i)
        verts[i] = x.segment<3>(3 * i);
    return TriMesh(std::move(verts), ssm.faces());
}

namespace {

constexpr char ssm_magic[8] = {'S', 'H', 'A', 'P', 'E', 'S', 'S', 'M'};

template <typename T>
void put(std::string& buf, T value)
{
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    buf.append(bytes, sizeof(T));
}

void put_chunk(std::ofstream& out, const char (&tag)[5], const std::string& payload)
{
    out.write(tag, 4);
    const std::uint64_t len = payload.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

class ByteCursor
{
public:
    ByteCursor(const std::string& data, std::string path) : data_(data), path_(std::move(path)) {}

    template <typename T>
    T get()
    {
        if (pos_ + sizeof(T) > data_.size())
            throw corrupt("truncated");
        T value;
        std::memcpy(&value, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::string take(std::size_t n)
    {
        if (n > data_.size() - pos_)
            throw corrupt("truncated chunk");
        std::string out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    bool done() const { return pos_ == data_.size(); }

    FormatError corrupt(const std::string& what) const
    {
        return FormatError("corrupt SSM file '" + path_ + "': " + what);
    }

private:
    const std::string& data_;
    std::string path_;
    std::size_t pos_ = 0;
};

} // namespace

void save_ssm(const Ssm& ssm, const std::string& path, const nlohmann::json& provenance)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    out.write(ssm_magic, sizeof(ssm_magic));
    const std::uint32_t version = ssm_format_version;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));

    std::string head;
    put<std::uint64_t>(head, ssm.vertex_count());
    put<std::uint64_t>(head, ssm.mode_count());
    put<std::uint64_t>(head, ssm.faces().size());
    put<std::uint64_t>(head, ssm.training_count());
    put_chunk(out, "HEAD", head);

    auto reals = [](const double* p, std::size_t n) {
        return std::string(reinterpret_cast<const char*>(p), n * sizeof(double));
    };
    put_chunk(out, "MEAN", reals(ssm.mean().data(), static_cast<std::size_t>(ssm.mean().size())));
    put_chunk(out, "MODE", reals(ssm.modes().data(), static_cast<std::size_t>(ssm.modes().size())));
    put_chunk(out, "SDEV", reals(ssm.std_devs().data(), static_cast<std::size_t>(ssm.std_devs().size())));

    std::string faces;
    faces.reserve(ssm.faces().size() * 12);
    for (const Face& f : ssm.faces())
        for (int v : f)
            put<std::int32_t>(faces, v);
    put_chunk(out, "FACE", faces);
    put_chunk(out, "END!", {});
    out.flush();
    if (!out)
        throw IoError("failed writing '" + path + "'");

    nlohmann::json sidecar;
    sidecar["format"] = "shapecomplete-ssm";
    sidecar["version"] = ssm_format_version;
    sidecar["vertex_count"] = ssm.vertex_count();
    sidecar["mode_count"] = ssm.mode_count();
    sidecar["training_count"] = ssm.training_count();
    sidecar["std_devs"] = std::vector<double>(ssm.std_devs().data(), ssm.std_devs().data() + ssm.std_devs().size());
    sidecar["provenance"] = provenance;
    std::ofstream side(path + ".json", std::ios::binary);
    if (!side)
        throw IoError("cannot open '" + path + ".json' for writing");
    side << sidecar.dump(2) << '\n';
    if (!side)
        throw IoError("failed writing '" + path + ".json'");
}

Ssm load_ssm(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open SSM file '" + path + "'");
    const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    ByteCursor cur(data, path);

    if (data.size() < sizeof(ssm_magic) || std::memcmp(data.data(), ssm_magic, sizeof(ssm_magic)) != 0)
        throw cur.corrupt("bad magic");
    cur.take(sizeof(ssm_magic));
    const auto version = cur.get<std::uint32_t>();
    if (version != ssm_format_version)
        throw FormatError("SSM file '" + path + "' has unsupported version " + std::to_string(version) +
                          " (expected " + std::to_string(ssm_format_version) + ")");

    std::uint64_t n = 0, k = 0, f = 0, s = 0;
    bool have_head = false, have_end = false;
    std::string mean_bytes, mode_bytes, sdev_bytes, face_bytes;
    while (!cur.done())
    {
        const std::string tag = cur.take(4);
        const auto len = cur.get<std::uint64_t>();
        std::string payload = cur.take(len);
        if (tag == "HEAD")
        {
            if (len != 32)
                throw cur.corrupt("bad HEAD chunk");
            std::memcpy(&n, payload.data(), 8);
            std::memcpy(&k, payload.data() + 8, 8);
            std::memcpy(&f, payload.data() + 16, 8);
            std::memcpy(&s, payload.data() + 24, 8);
            have_head = true;
        }
        else if (tag == "MEAN") mean_bytes = std::move(payload);
        else if (tag == "MODE") mode_bytes = std::move(payload);
        else if (tag == "SDEV") sdev_bytes = std::move(payload);
        else if (tag == "FACE") face_bytes = std::move(payload);
        else if (tag == "END!")
        {
            have_end = true;
            if (!cur.done())
                throw cur.corrupt("data after END! chunk");
        }
        else
            throw cur.corrupt("unknown chunk '" + tag + "'");
    }
    if (!have_head || !have_end)
        throw cur.corrupt("missing HEAD or END! chunk");
    const std::uint64_t limit = std::numeric_limits<std::uint32_t>::max();
    if (n > limit || k > limit || f > limit)
        throw cur.corrupt("implausible sizes in HEAD");
    if (mean_bytes.size() != 3 * n * 8 || mode_bytes.size() != 3 * n * k * 8 || sdev_bytes.size() != k * 8 ||
        face_bytes.size() != 3 * f * 4)
        throw cur.corrupt("chunk sizes disagree with HEAD");

    Eigen::VectorXd mean(static_cast<Eigen::Index>(3 * n));
    Eigen::MatrixXd modes(static_cast<Eigen::Index>(3 * n), static_cast<Eigen::Index>(k));
    Eigen::VectorXd sdev(static_cast<Eigen::Index>(k));
    std::memcpy(mean.data(), mean_bytes.data(), mean_bytes.size());
    std::memcpy(modes.data(), mode_bytes.data(), mode_bytes.size());
    std::memcpy(sdev.data(), sdev_bytes.data(), sdev_bytes.size());
    std::vector<Face> faces(f);
    for (std::size_t i = 0; i < f; ++i)
        for (int j = 0; j < 3; ++j)
        {
            std::int32_t v;
            std::memcpy(&v, face_bytes.data() + (3 * i + j) * 4, 4);
            faces[i][j] = v;
        }

    try
    {
        return Ssm(std::move(mean), std::move(modes), std::move(sdev), std::move(faces), s);
    }
    catch (const Error& e)
    {
        throw cur.corrupt(e.what());
    }
}

} // namespace shapecomplete
