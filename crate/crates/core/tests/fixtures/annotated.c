int f(int *p)
{
  int x;
  int y = g(p);
  x = 0;
  for (int i=0; i<y; ++i)
  {
    x += h(p[i]);
  }
  return x;
}
