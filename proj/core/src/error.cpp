#include "lexcascade/error.hpp"

// Error types are header-only; this translation unit anchors the vtables.
