#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static const char *month_names[] = {"january", "february", "march",     "april",   "may",      "june",
                                    "july",    "august",   "september", "october", "november", "december"};

static int days_in(int m, int leap) {
  switch (m) {
    case 0: return 31;
    case 1: return leap ? 29 : 28;
    case 2: return 31;
    case 3: return 30;
    case 4: return 31;
    case 5: return 30;
    case 6: return 31;
    case 7: return 31;
    case 8: return 30;
    case 9: return 31;
    case 10: return 30;
    case 11: return 31;
    default: return -1;
  }
}

static const char *classify(int c) {
  switch (c) {
    case 'a': case 'e': case 'i': case 'o': case 'u': return "vowel";
    case '0': case '1': case '2': case '3': case '4':
    case '5': case '6': case '7': case '8': case '9': return "digit";
    case ' ': case '\t': case '\n': return "space";
    case '.': case ',': case ';': case ':': case '!': case '?': return "punct";
    default: return c >= 'a' && c <= 'z' ? "consonant" : "other";
  }
}

int main(int argc, char **argv) {
  int year = argc > 1 ? atoi(argv[1]) : 2024;
  int leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  int total = 0;
  for (int m = 0; m < 12; ++m) {
    int d = days_in(m, leap);
    total += d;
    printf("%-10s %2d %3d\n", month_names[m], d, total);
  }
  const char *text = argc > 2 ? argv[2] : "hello, world 42!";
  int counts[5] = {0};
  for (size_t i = 0; i < strlen(text); ++i) {
    const char *k = classify(text[i]);
    printf("%c:%s ", text[i], k);
    counts[strlen(k) % 5]++;
  }
  printf("\n%d %d %d %d %d\n", counts[0], counts[1], counts[2], counts[3], counts[4]);
  return total % 7;
}
