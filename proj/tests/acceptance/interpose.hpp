#pragma once

namespace acceptance {

/// Resets the counter and starts counting process, shell and socket calls.
void arm();
/// Stops counting and returns the number of calls seen since arm().
long disarm();

}  // namespace acceptance
