#pragma once

#include <string>
#include <vector>

#include "commsense/error.hpp"

namespace commsense {

/**
 * @brief Mapping between occupancy categories and person counts.
 *
 * Categories are 1-based labels in dataset order; category 1 is the empty
 * room. The default map is the eight-step measurement ladder
 * 0, 1, 4, 7, 10, 13, 16, 19 persons.
 */
class CategoryMap {
public:
    CategoryMap() : persons_{0, 1, 4, 7, 10, 13, 16, 19} {}

    explicit CategoryMap(std::vector<int> person_counts) : persons_(std::move(person_counts)) {
        if (persons_.empty()) throw DomainError("category map needs at least one category");
        for (std::size_t i = 0; i < persons_.size(); ++i) {
            if (persons_[i] < 0) throw DomainError("person counts must be non-negative");
            if (i > 0 && persons_[i] <= persons_[i - 1])
                throw DomainError("person counts must be strictly increasing");
        }
    }

    int size() const { return static_cast<int>(persons_.size()); }

    int persons(int category) const {
        if (category < 1 || category > size())
            throw DomainError("category " + std::to_string(category) + " out of range 1.." +
                              std::to_string(size()));
        return persons_[static_cast<std::size_t>(category - 1)];
    }

    int category_of(int person_count) const {
        for (std::size_t i = 0; i < persons_.size(); ++i)
            if (persons_[i] == person_count) return static_cast<int>(i) + 1;
        throw DomainError("no category holds " + std::to_string(person_count) + " persons");
    }

    const std::vector<int>& person_counts() const { return persons_; }

private:
    std::vector<int> persons_;
};

} // namespace commsense
