#include <ctype.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static char scratch[256];
static const char *samples[] = {"racecar", "level", "hello", "A man a plan a canal Panama", "abcba", "nope"};

static void reverse(char *s) {
  size_t n = strlen(s);
  for (size_t i = 0; i < n / 2; ++i) {
    char t = s[i];
    s[i] = s[n - 1 - i];
    s[n - 1 - i] = t;
  }
}

static int palindrome(const char *s) {
  size_t i = 0, j = strlen(s);
  while (j > i) {
    while (i < j && !isalnum((unsigned char)s[i])) i++;
    while (j > i && !isalnum((unsigned char)s[j - 1])) j--;
    if (j <= i) break;
    if (tolower((unsigned char)s[i]) != tolower((unsigned char)s[j - 1])) return 0;
    i++;
    j--;
  }
  return 1;
}

static char *caesar(const char *s, int k) {
  size_t n = strlen(s);
  char *out = malloc(n + 1);
  for (size_t i = 0; i < n; ++i) {
    char c = s[i];
    if (c >= 'a' && c <= 'z') c = (char)('a' + (c - 'a' + k) % 26);
    else if (c >= 'A' && c <= 'Z') c = (char)('A' + (c - 'A' + k) % 26);
    out[i] = c;
  }
  out[n] = 0;
  return out;
}

int main(int argc, char **argv) {
  int k = argc > 1 ? atoi(argv[1]) : 3;
  for (size_t i = 0; i < sizeof samples / sizeof samples[0]; ++i) {
    strncpy(scratch, samples[i], sizeof scratch - 1);
    reverse(scratch);
    char *enc = caesar(samples[i], k);
    printf("%-30s %-30s %d %s\n", samples[i], scratch, palindrome(samples[i]), enc);
    free(enc);
  }
  char line[128];
  strcpy(line, "split,these;words into,pieces");
  for (char *tok = strtok(line, ",; "); tok; tok = strtok(NULL, ",; ")) printf("[%s]", tok);
  printf("\n");
  return 0;
}
