// Counting wrappers over process, shell and network entry points. They live in the
// executable, so calls from the statically linked scanner bind here first.
// Only headers without exception-specified declarations of these names are included.

#include <dlfcn.h>

#include <atomic>
#include <cstdarg>
#include <cstdio>

#include "interpose.hpp"

namespace {

std::atomic<bool> g_armed{false};
std::atomic<long> g_calls{0};

void count() {
  if (g_armed.load()) g_calls.fetch_add(1);
}

template <class F>
F next(const char* name) {
  return reinterpret_cast<F>(dlsym(RTLD_NEXT, name));
}

}  // namespace

namespace acceptance {

void arm() {
  g_calls = 0;
  g_armed = true;
}

long disarm() {
  g_armed = false;
  return g_calls.load();
}

}  // namespace acceptance

extern "C" {

using pid_type = int;


pid_type fork() {
  count();
  return next<pid_type (*)()>("fork")();
}

pid_type vfork() {
  count();
  return next<pid_type (*)()>("fork")();
}

int execve(const char* path, char* const argv[], char* const envp[]) {
  count();
  return next<int (*)(const char*, char* const[], char* const[])>("execve")(path, argv, envp);
}

int execv(const char* path, char* const argv[]) {
  count();
  return next<int (*)(const char*, char* const[])>("execv")(path, argv);
}

int execvp(const char* file, char* const argv[]) {
  count();
  return next<int (*)(const char*, char* const[])>("execvp")(file, argv);
}

int execvpe(const char* file, char* const argv[], char* const envp[]) {
  count();
  return next<int (*)(const char*, char* const[], char* const[])>("execvpe")(file, argv, envp);
}

namespace {
constexpr int kMaxArgs = 64;

int collect(const char* first, va_list ap, char** argv) {
  int n = 0;
  argv[n++] = const_cast<char*>(first);
  while (n < kMaxArgs - 1 && (argv[n] = va_arg(ap, char*)) != nullptr) ++n;
  argv[n] = nullptr;
  return n;
}
}  // namespace

int execl(const char* path, const char* arg, ...) {
  count();
  char* argv[kMaxArgs];
  va_list ap;
  va_start(ap, arg);
  collect(arg, ap, argv);
  va_end(ap);
  return next<int (*)(const char*, char* const[])>("execv")(path, argv);
}

int execlp(const char* file, const char* arg, ...) {
  count();
  char* argv[kMaxArgs];
  va_list ap;
  va_start(ap, arg);
  collect(arg, ap, argv);
  va_end(ap);
  return next<int (*)(const char*, char* const[])>("execvp")(file, argv);
}

int execle(const char* path, const char* arg, ...) {
  count();
  char* argv[kMaxArgs];
  va_list ap;
  va_start(ap, arg);
  collect(arg, ap, argv);
  char* const* envp = va_arg(ap, char* const*);
  va_end(ap);
  return next<int (*)(const char*, char* const[], char* const[])>("execve")(path, argv, envp);
}

int posix_spawn(pid_type* pid, const char* path, const void* actions, const void* attr, char* const argv[],
                char* const envp[]) {
  count();
  return next<int (*)(pid_type*, const char*, const void*, const void*, char* const[], char* const[])>(
      "posix_spawn")(pid, path, actions, attr, argv, envp);
}

int posix_spawnp(pid_type* pid, const char* file, const void* actions, const void* attr, char* const argv[],
                 char* const envp[]) {
  count();
  return next<int (*)(pid_type*, const char*, const void*, const void*, char* const[], char* const[])>(
      "posix_spawnp")(pid, file, actions, attr, argv, envp);
}

int system(const char* command) {
  count();
  return next<int (*)(const char*)>("system")(command);
}

FILE* popen(const char* command, const char* mode) {
  count();
  return next<FILE* (*)(const char*, const char*)>("popen")(command, mode);
}

int socket(int domain, int type, int protocol) {
  count();
  return next<int (*)(int, int, int)>("socket")(domain, type, protocol);
}

int connect(int fd, const void* addr, unsigned len) {
  count();
  return next<int (*)(int, const void*, unsigned)>("connect")(fd, addr, len);
}

}  // extern "C"
