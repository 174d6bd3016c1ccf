#include "eitlog/sobolev.hpp"

#include "eitlog/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace eitlog {

double fourier_weight(int frequency, double r) {
    return std::pow(1.0 + static_cast<double>(frequency) * frequency, 0.5 * r);
}

double sobolev_operator_norm(const SobolevOperator& T, SobolevIndex r_in,
                             SobolevIndex r_out) {
    if (std::abs(r_in.r) > 1.0 || std::abs(r_out.r) > 1.0)
        throw Error("sobolev_operator_norm: index outside [-1, 1]");
    const int n = T.dim();
    Eigen::VectorXd d_out(n), d_in_inv(n);
    for (int i = 0; i < n; ++i) {
        d_out[i] = fourier_weight(T.frequencies[i], r_out.r);
        d_in_inv[i] = 1.0 / fourier_weight(T.frequencies[i], r_in.r);
    }
    const Eigen::MatrixXd weighted =
        d_out.asDiagonal() * T.matrix * d_in_inv.asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(weighted);
    return svd.singularValues()[0];
}

double sobolev_operator_norm(const SobolevOperator& T) {
    return sobolev_operator_norm(T, T.r_in, T.r_out);
}

double fourier_norm(const Eigen::VectorXd& coeffs,
                    const Eigen::VectorXi& frequencies, double r) {
    double s = 0.0;
    for (int i = 0; i < coeffs.size(); ++i) {
        const double w = fourier_weight(frequencies[i], r);
        s += w * w * coeffs[i] * coeffs[i];
    }
    return std::sqrt(s);
}

void save_sobolev_operator(const SobolevOperator& T,
                           const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IOError("save_sobolev_operator: cannot open " + path.string());
    out.precision(17);
    out << "# sobolev_operator dim=" << T.dim() << " r_in=" << T.r_in.r
        << " r_out=" << T.r_out.r << " symmetric=" << (T.symmetric ? 1 : 0)
        << '\n';
    out << "# frequencies:";
    for (int i = 0; i < T.frequencies.size(); ++i) out << ' ' << T.frequencies[i];
    out << '\n';
    for (int i = 0; i < T.dim(); ++i) {
        for (int j = 0; j < T.dim(); ++j) {
            if (j) out << ',';
            out << T.matrix(i, j);
        }
        out << '\n';
    }
    if (!out) throw IOError("save_sobolev_operator: write failed");
}

SobolevOperator load_sobolev_operator(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IOError("load_sobolev_operator: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw IOError("load_sobolev_operator: empty file");
    SobolevOperator T;
    int dim = 0, sym = 1;
    // header: "# sobolev_operator dim=<d> r_in=<..> r_out=<..> symmetric=<0|1>"
    {
        std::istringstream hs(line);
        std::string tok;
        while (hs >> tok) {
            if (tok.rfind("dim=", 0) == 0) dim = std::stoi(tok.substr(4));
            else if (tok.rfind("r_in=", 0) == 0) T.r_in = std::stod(tok.substr(5));
            else if (tok.rfind("r_out=", 0) == 0) T.r_out = std::stod(tok.substr(6));
            else if (tok.rfind("symmetric=", 0) == 0) sym = std::stoi(tok.substr(10));
        }
    }
    if (dim <= 0) throw IOError("load_sobolev_operator: bad header");
    T.symmetric = sym != 0;
    if (!std::getline(in, line))
        throw IOError("load_sobolev_operator: missing frequency row");
    {
        std::istringstream fs(line);
        std::string hash, tag;
        fs >> hash >> tag;
        T.frequencies.resize(dim);
        for (int i = 0; i < dim; ++i) fs >> T.frequencies[i];
        if (!fs) throw IOError("load_sobolev_operator: bad frequency row");
    }
    T.matrix.resize(dim, dim);
    for (int i = 0; i < dim; ++i) {
        if (!std::getline(in, line))
            throw IOError("load_sobolev_operator: truncated matrix");
        std::istringstream rs(line);
        std::string cell;
        for (int j = 0; j < dim; ++j) {
            if (!std::getline(rs, cell, ','))
                throw IOError("load_sobolev_operator: short row");
            T.matrix(i, j) = std::stod(cell);
        }
    }
    return T;
}

} // namespace eitlog
