const debug = require('debug')('app');
const ms = require('ms');
// require('yargs') is commented out
