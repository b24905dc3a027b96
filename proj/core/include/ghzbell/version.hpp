#ifndef GHZBELL_VERSION_HPP
#define GHZBELL_VERSION_HPP

namespace ghzbell {

// Build identifier: `git describe` output when built from a checkout,
// otherwise the release version.
const char* build_version();

}  // namespace ghzbell

#endif  // GHZBELL_VERSION_HPP
