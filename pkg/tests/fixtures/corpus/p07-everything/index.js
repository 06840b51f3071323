require('a-pin');
require('b-url');
require('c-tight');
require('d-loose');
require('f-ghost');
