int sum(int *a, int n)
{
  int s = 0;
  for (int k = 0; k < n; ++k)
    s += a[k];
  return s;
}
