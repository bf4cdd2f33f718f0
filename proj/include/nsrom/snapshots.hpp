#pragma once

#include <cstddef>
#include <vector>

#include "nsrom/errors.hpp"
#include "nsrom/numerics/vector.hpp"

namespace nsrom {

// Time-stamped velocity coefficient vectors u^0 ... u^M.
struct SnapshotSet {
  std::vector<Vector> fields;
  Vector times;

  std::size_t size() const noexcept { return fields.size(); }
  std::size_t dofs() const noexcept { return fields.empty() ? 0 : fields.front().size(); }

  void add(double t, Vector u) {
    NSROM_REQUIRE(fields.empty() || u.size() == dofs(), "SnapshotSet: snapshot length differs from earlier ones");
    NSROM_REQUIRE(times.empty() || t > times.back(), "SnapshotSet: times must increase");
    fields.push_back(std::move(u));
    times.push_back(t);
  }

  void validate() const {
    NSROM_REQUIRE(fields.size() == times.size(), "SnapshotSet: field and time counts differ");
    for (const Vector& f : fields) NSROM_REQUIRE(f.size() == dofs(), "SnapshotSet: ragged snapshot lengths");
  }
};

}  // namespace nsrom
