#pragma once

namespace semvec {

// Entry point shared by the semvec binary and the in-process CLI tests.
// Exit codes: 0 ok, 1 usage/config, 2 data, 3 numerical failure.
int cli_main(int argc, const char* const* argv);

}  // namespace semvec
