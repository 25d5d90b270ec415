#include "tdcif/classify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "tdcif/error.hpp"
#include "tdcif/kernels.hpp"

namespace tdcif {

void LabeledVectors::validate() const {
  if (vectors.cols() != labels.size())
    throw InvalidArgument("labeled vectors: " + std::to_string(vectors.cols()) + " vectors but " +
                          std::to_string(labels.size()) + " labels");
}

LabeledVectors vectorize(std::span<const Matrix> samples, std::span<const int> labels) {
  if (samples.size() != labels.size()) throw InvalidArgument("vectorize: label count mismatch");
  if (samples.empty()) return {};
  const std::size_t d = samples[0].size();
  LabeledVectors out{Matrix(d, samples.size()), std::vector<int>(labels.begin(), labels.end())};
  for (std::size_t j = 0; j < samples.size(); ++j) {
    if (samples[j].size() != d) throw InvalidArgument("vectorize: samples differ in size");
    std::copy(samples[j].data().begin(), samples[j].data().end(), out.vectors.col(j).begin());
  }
  return out;
}

EvalReport make_report(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size())
    throw InvalidArgument("make_report: prediction count mismatch");
  std::set<int> classes(truth.begin(), truth.end());
  classes.insert(predicted.begin(), predicted.end());
  EvalReport r;
  r.classes.assign(classes.begin(), classes.end());
  std::map<int, std::size_t> index;
  for (std::size_t i = 0; i < r.classes.size(); ++i) index[r.classes[i]] = i;
  r.confusion.assign(r.classes.size(), std::vector<std::size_t>(r.classes.size(), 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++r.confusion[index[truth[i]]][index[predicted[i]]];
    if (truth[i] == predicted[i]) ++r.correct;
  }
  r.total = truth.size();
  r.predictions.assign(predicted.begin(), predicted.end());
  r.accuracy = r.total ? static_cast<double>(r.correct) / static_cast<double>(r.total) : 0.0;
  r.per_run = {r.accuracy};
  r.mean = r.accuracy;
  return r;
}

EvalReport aggregate(std::span<const EvalReport> runs) {
  if (runs.empty()) throw InvalidArgument("aggregate: no runs");
  std::set<int> classes;
  for (const auto& r : runs) classes.insert(r.classes.begin(), r.classes.end());
  EvalReport out;
  out.classes.assign(classes.begin(), classes.end());
  std::map<int, std::size_t> index;
  for (std::size_t i = 0; i < out.classes.size(); ++i) index[out.classes[i]] = i;
  out.confusion.assign(out.classes.size(), std::vector<std::size_t>(out.classes.size(), 0));
  for (const auto& r : runs) {
    for (std::size_t i = 0; i < r.classes.size(); ++i)
      for (std::size_t j = 0; j < r.classes.size(); ++j)
        out.confusion[index[r.classes[i]]][index[r.classes[j]]] += r.confusion[i][j];
    out.correct += r.correct;
    out.total += r.total;
    out.per_run.push_back(r.accuracy);
  }
  out.accuracy =
      out.total ? static_cast<double>(out.correct) / static_cast<double>(out.total) : 0.0;
  std::vector<double> sorted = out.per_run;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  out.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  if (sorted.size() > 1) {
    double ss = 0.0;
    for (double a : sorted) ss += (a - out.mean) * (a - out.mean);
    out.stddev = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

std::vector<int> knn_predict(const LabeledVectors& train, const Matrix& test, std::size_t k) {
  train.validate();
  if (k < 1) throw InvalidArgument("knn: k must be >= 1");
  if (train.count() == 0) throw InvalidArgument("knn: empty training set");
  if (test.rows() != train.dim())
    throw InvalidArgument("knn: test vectors have dimension " + std::to_string(test.rows()) +
                          ", training vectors " + std::to_string(train.dim()));
  const std::size_t nt = test.cols(), nr = train.count();
  const std::size_t kk = std::min(k, nr);
  std::vector<double> dist(nt * nr);
  kernels::parallel::pairwise_sq_dist(train.dim(), nt, nr, test.data(), train.vectors.data(), dist);

  std::vector<int> out(nt);
  std::vector<std::size_t> order(nr);
  for (std::size_t t = 0; t < nt; ++t) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto d = [&](std::size_t j) { return dist[t + nt * j]; };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kk), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        return d(a) < d(b) || (d(a) == d(b) && a < b);
                      });
    std::map<int, std::pair<std::size_t, double>> votes;  // class -> (count, distance sum)
    for (std::size_t i = 0; i < kk; ++i) {
      auto& v = votes[train.labels[order[i]]];
      ++v.first;
      v.second += std::sqrt(d(order[i]));
    }
    auto best = votes.begin();
    for (auto it = votes.begin(); it != votes.end(); ++it) {
      const auto& [cnt, sum] = it->second;
      if (cnt > best->second.first || (cnt == best->second.first && sum < best->second.second))
        best = it;
    }
    out[t] = best->first;
  }
  return out;
}

EvalReport knn_classify(const LabeledVectors& train, const LabeledVectors& test, std::size_t k) {
  test.validate();
  return make_report(test.labels, knn_predict(train, test.vectors, k));
}

std::vector<int> nearest_centroid_predict(const LabeledVectors& train, const Matrix& test) {
  train.validate();
  if (train.count() == 0) throw InvalidArgument("nearest_centroid: empty training set");
  if (test.rows() != train.dim()) throw InvalidArgument("nearest_centroid: dimension mismatch");
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t j = 0; j < train.count(); ++j) members[train.labels[j]].push_back(j);
  const std::size_t d = train.dim();
  Matrix centroids(d, members.size());
  std::vector<int> ids;
  std::size_t c = 0;
  for (const auto& [label, idx] : members) {
    if (idx.empty()) throw InvalidArgument("nearest_centroid: empty class");
    auto dst = centroids.col(c++);
    for (std::size_t j : idx)
      for (std::size_t i = 0; i < d; ++i) dst[i] += train.vectors(i, j);
    for (double& x : dst) x /= static_cast<double>(idx.size());
    ids.push_back(label);
  }
  const std::size_t nt = test.cols(), nc = ids.size();
  std::vector<double> dist(nt * nc);
  kernels::parallel::pairwise_sq_dist(d, nt, nc, test.data(), centroids.data(), dist);
  std::vector<int> out(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < nc; ++j)
      if (dist[t + nt * j] < dist[t + nt * best]) best = j;  // ids ascending: ties keep lowest
    out[t] = ids[best];
  }
  return out;
}

EvalReport nearest_centroid(const LabeledVectors& train, const LabeledVectors& test) {
  test.validate();
  return make_report(test.labels, nearest_centroid_predict(train, test.vectors));
}

}  // namespace tdcif
