#include <stdint.h>
#include <stdio.h>
#include <string.h>

static uint32_t crc_table[256];
static const uint8_t popcount4[16] = {0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4};
static const char hexdigits[] = "0123456789abcdef";

static void init_table(void) {
  for (uint32_t i = 0; i < 256; ++i) {
    uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    crc_table[i] = c;
  }
}

static uint32_t crc32(const char *s, size_t n) {
  uint32_t c = 0xFFFFFFFFu;
  for (size_t i = 0; i < n; ++i) c = crc_table[(c ^ (uint8_t)s[i]) & 0xFF] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

static int popcount(uint32_t v) {
  int n = 0;
  for (; v; v >>= 4) n += popcount4[v & 15];
  return n;
}

static void to_hex(uint32_t v, char *out) {
  for (int i = 7; i >= 0; --i) {
    out[i] = hexdigits[v & 15];
    v >>= 4;
  }
  out[8] = 0;
}

int main(int argc, char **argv) {
  init_table();
  const char *inputs[] = {"", "a", "abc", "message digest", "The quick brown fox jumps over the lazy dog"};
  char hex[9];
  for (size_t i = 0; i < sizeof inputs / sizeof inputs[0]; ++i) {
    uint32_t c = crc32(inputs[i], strlen(inputs[i]));
    to_hex(c, hex);
    printf("%s bits=%d \"%s\"\n", hex, popcount(c), inputs[i]);
  }
  for (int i = 1; i < argc; ++i) {
    to_hex(crc32(argv[i], strlen(argv[i])), hex);
    printf("%s \"%s\"\n", hex, argv[i]);
  }
  return 0;
}
